#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "erpf/block_system.hpp"
#include "erpf/factorization.hpp"

namespace erpf {

enum class SolverKind { direct, ic, diagonal };

/// How one inner block is approximately inverted.
struct InnerSolverSpec {
  SolverKind kind = SolverKind::direct;
  Index rho = 0;     // fill count, ic only
  bool rcm = false;  // ic only

  static InnerSolverSpec direct() { return {}; }
  static InnerSolverSpec ic(Index rho) { return {SolverKind::ic, rho, false}; }
  static InnerSolverSpec diagonal() { return {SolverKind::diagonal, 0, false}; }
};

std::string to_string(const InnerSolverSpec& spec);

/// Direct Cholesky (AMD ordering), ic(rho) or Jacobi on the diagonal of m.
InnerSolverPtr make_inner_solver(const CsrMatrix& m, const InnerSolverSpec& spec);

struct RpfConfig {
  double omega_K = 10.0;
  double omega_A = 10.0;
  InnerSolverSpec solver_K;  // K_hat, or K for the projected K-side
  InnerSolverSpec solver_A;  // A_hat, or A for the projected A-side
  InnerSolverSpec solver_S;  // sparse Schur surrogate of the projected A-side
  /// Replaces the estimated relaxation parameter (bounds are unaffected).
  std::optional<double> alpha_override;

  /// All inner solves direct (the "M_I" family).
  static RpfConfig direct_inner();
  /// Incomplete Cholesky inner solves (the "M_II" family).
  static RpfConfig incomplete_inner(Index rho_K, Index rho_A, Index rho_S);

  void validate() const;
};

struct DiagonalSurrogateA {
  Vector A_tilde;  // a_i = sqrt(sum_j |A_ij|)
  Vector D_A;      // diag(B^T A_tilde^{-1} B)
};

DiagonalSurrogateA compute_DA(const CsrMatrix& A, const CsrMatrix& B);
/// diag(Q^T diag(K)^{-1} Q)
Vector compute_DK(const CsrMatrix& K, const CsrMatrix& Q);
/// sqrt(gamma)/n_p * sum_i sqrt(D_K_i D_A_i)
double compute_alpha(std::span<const double> D_K, std::span<const double> D_A, double gamma);

struct AlphaBounds {
  double alpha_K = 0.0;
  double alpha_A = 0.0;
};

AlphaBounds compute_alpha_bounds(std::span<const double> D_K, std::span<const double> D_A, double gamma,
                                 const RpfConfig& cfg);

/// Scalars and diagonal surrogates produced by the set-up phase.
struct RpfParameters {
  double gamma = 0.0;
  double alpha = 0.0;
  double alpha_K = 0.0;
  double alpha_A = 0.0;
  double omega_K = 10.0;
  double omega_A = 10.0;
  double p_norm_inf = 0.0;
  Vector D_K;
  Vector D_A;
  Vector A_tilde;

  double alpha_used_K() const noexcept { return std::max(alpha, alpha_K); }
  double alpha_used_A() const noexcept { return std::max(alpha, alpha_A); }
  double ratio_K() const noexcept { return alpha / alpha_K; }
  double ratio_A() const noexcept { return alpha / alpha_A; }
};

RpfParameters estimate_parameters(const ThreeFieldSystem& sys, const RpfConfig& cfg);

/// gamma at which alpha / alpha_K equals `ratio` (D_K, D_A fixed).
double gamma_for_ratio_K(const RpfParameters& params, double ratio);
/// gamma at which alpha / alpha_A equals `ratio` (D_K, D_A fixed).
double gamma_for_ratio_A(const RpfParameters& params, double ratio);

/// Set-up RPF preconditioner. The augmented blocks and their solvers are
/// empty when a variant replaces the corresponding inner solve.
struct RpfOperator {
  RpfParameters params;
  CsrMatrix Q;
  CsrMatrix B;
  CsrMatrix K_hat;
  CsrMatrix A_hat;
  InnerSolverPtr solver_K;
  InnerSolverPtr solver_A;
  std::vector<std::string> warnings;

  double alpha() const noexcept { return params.alpha; }
  double gamma() const noexcept { return params.gamma; }
  Index nu() const noexcept { return Q.rows(); }
  Index nq() const noexcept { return B.rows(); }
  Index np() const noexcept { return Q.cols(); }
};

/// Which augmented blocks rpf_setup assembles and factors.
struct RpfBuildMask {
  bool K_hat = true;
  bool A_hat = true;
};

RpfOperator rpf_setup(const ThreeFieldSystem& sys, const RpfConfig& cfg, RpfBuildMask mask = {});
/// Same, with parameters computed beforehand.
RpfOperator rpf_setup(const ThreeFieldSystem& sys, const RpfConfig& cfg, RpfParameters params,
                      RpfBuildMask mask);

using BlockSolve = std::function<void(std::span<const double> b, std::span<double> x)>;

/// The four-factor application with caller-supplied solves for the K_hat and
/// A_hat steps.
BlockVector rpf_apply_with(const CsrMatrix& Q, const CsrMatrix& B, double alpha, double gamma,
                           const BlockSolve& solve_K, const BlockSolve& solve_A, const BlockVector& r);

BlockVector rpf_apply(const RpfOperator& op, const BlockVector& r);

/// key = value lines: alpha, alpha_K, alpha_A, their ratios, gamma, ||P||_inf.
std::string setup_summary(const RpfParameters& params);
void write_setup_summary(const std::filesystem::path& path, const std::string& summary);

}  // namespace erpf

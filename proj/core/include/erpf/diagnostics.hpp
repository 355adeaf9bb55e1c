#pragma once

#include <filesystem>
#include <vector>

#include "erpf/block_system.hpp"
#include "erpf/erpf.hpp"
#include "erpf/factorization.hpp"

namespace erpf {

/// Largest dimension any dense eigen-diagnostic accepts.
inline constexpr Index kDenseEigenLimit = 1500;

/// Eigenvalues of Ml v = lambda Mr v, ascending. Mr must be SPD.
std::vector<double> generalized_eigs(const DenseMatrix& Ml, const DenseMatrix& Mr);
/// Eigenvalues of a symmetric matrix, ascending.
std::vector<double> symmetric_eigs(const DenseMatrix& m);

/// Dense F^T C^{-1} F through a sparse Cholesky of C.
DenseMatrix schur_dense(const CsrMatrix& C, const CsrMatrix& F);

struct EigenReport {
  std::vector<double> eigenvalues;  // real; the spectra involved are real
  double mu1 = 0.0;                 // largest eigenvalue of F^T C^{-1} F
  double bound_lambda1 = 1.0;       // (beta mu1 + 1) / (beta_ell mu1 + 1)
  double max_violation = 0.0;       // distance of the spectrum outside [1, bound]
};

/// Spectrum of (C + beta F F^T, C + beta_ell F F^T) against its upper bound.
EigenReport augmented_spectrum_bound(const CsrMatrix& C, const CsrMatrix& F, double beta, double beta_ell);

/// Spectral radius of I - (beta_ell/beta) C_hat_ell^{-1} C_hat by power
/// iteration with exact dense solves.
double iteration_matrix_radius(const AugmentedBlockContext& ctx, double rel_tol = 1e-8, Index max_it = 100000);

/// All min(rows, cols) singular values, descending.
std::vector<double> singular_values(const CsrMatrix& m);

/// Dense model of the relaxed preconditioned spectrum used to pick alpha.
class TraceModel {
 public:
  /// Exact Schur complements Q^T K^{-1} Q and B^T A^{-1} B (dense).
  static TraceModel exact(const ThreeFieldSystem& sys);
  /// S_K = diag(D_K), S_A = diag(D_A), P = diag(p_diag).
  static TraceModel diagonal(std::span<const double> D_K, std::span<const double> D_A,
                             std::span<const double> p_diag, double gamma);

  Index np() const noexcept { return np_; }
  double gamma() const noexcept { return gamma_; }
  const DenseMatrix& S_K() const noexcept { return S_K_; }
  const DenseMatrix& S_A() const noexcept { return S_A_; }
  /// P + S_K + gamma S_A
  DenseMatrix S_full() const;

  /// n_p - tr[alpha (alpha I + S_K)^{-1} S (alpha I + gamma S_A)^{-1}]
  double objective(double alpha) const;

 private:
  TraceModel() = default;

  Index np_ = 0;
  double gamma_ = 0.0;
  bool diagonal_ = false;
  DenseMatrix S_K_;
  DenseMatrix S_A_;
  Vector P_;
};

std::vector<double> trace_objective_scan(const TraceModel& tm, std::span<const double> alpha_grid);
/// n points spaced logarithmically over [lo, hi].
std::vector<double> log_grid(double lo, double hi, Index n);

/// Exact dense Cholesky inverse, for small reference solves.
class DenseCholeskySolver final : public InnerSolver {
 public:
  explicit DenseCholeskySolver(const DenseMatrix& m);
  ~DenseCholeskySolver() override;

  Index dim() const noexcept override { return n_; }
  std::string_view kind() const noexcept override { return "dense-cholesky"; }
  void apply(std::span<const double> b, std::span<double> x) const override;
  using InnerSolver::apply;

 private:
  struct Impl;
  Index n_;
  std::unique_ptr<Impl> impl_;
};

/// I + beta F^T C^{-1} F, the exact Schur matrix of the projected method.
DenseMatrix exact_stilde(const CsrMatrix& C, const CsrMatrix& F, double beta);

/// index,value
void write_values_csv(const std::filesystem::path& path, std::span<const double> values);
/// index,real,imag with imag fixed at 0
void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> eigenvalues);

}  // namespace erpf

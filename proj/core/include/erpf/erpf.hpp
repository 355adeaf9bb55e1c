#pragma once

#include <memory>
#include <optional>
#include <string>

#include "erpf/krylov.hpp"
#include "erpf/rpf.hpp"

namespace erpf {

/// One augmented inner block C_hat = C + beta F F^T together with the solvers
/// the enhancement methods need. beta is the coefficient actually requested,
/// beta_ell the one at the conditioning bound.
struct AugmentedBlockContext {
  std::shared_ptr<const CsrMatrix> C;
  std::shared_ptr<const CsrMatrix> F;
  double beta = 0.0;
  double beta_ell = 0.0;
  InnerSolverPtr solver_Chat_ell;  // C + beta_ell F F^T
  InnerSolverPtr solver_C;
  InnerSolverPtr solver_Stilde;    // I + beta F^T C^{-1} F, approximately
  Index n_in = 2;

  Index dim() const noexcept { return C ? C->rows() : 0; }
  /// y = (C + beta F F^T) x without forming the product.
  void multiply_Chat(std::span<const double> x, std::span<double> y) const;
};

/// C + beta F F^T as an explicit sparse matrix.
CsrMatrix augmented_matrix(const CsrMatrix& C, const CsrMatrix& F, double beta);

/// n_in stationary steps w += (beta_ell/beta) C_hat_ell^{-1} (b - C_hat w), w_0 = 0.
Vector method1_apply(const AugmentedBlockContext& ctx, std::span<const double> b);

/// w = M_C^{-1}(b - beta F M_S^{-1} F^T M_C^{-1} b)
Vector method2_apply(const AugmentedBlockContext& ctx, std::span<const double> b);

/// Diagonal solver on 1 + D_K_i / alpha.
InnerSolverPtr build_stilde_K(std::span<const double> D_K, double alpha);
/// I + (gamma/alpha) B^T diag(A_tilde)^{-1} B
CsrMatrix assemble_stilde_A(const CsrMatrix& B, std::span<const double> A_tilde, double gamma, double alpha);
InnerSolverPtr build_stilde_A(const CsrMatrix& B, std::span<const double> A_tilde, double gamma, double alpha,
                              const InnerSolverSpec& spec);

/// Combined application that folds the projected inner solves into the block
/// factors. A side falls back to the A_hat solve of `op` when its context is
/// absent or alpha >= its bound; likewise for K.
BlockVector erpf2_alt_apply(const RpfOperator& op, const AugmentedBlockContext* ctx_K,
                            const AugmentedBlockContext* ctx_A, const BlockVector& r);

enum class SelectedVariant { erpf1_K_side, rpf, erpf2_A_side };

std::string_view to_string(SelectedVariant v) noexcept;

/// Warns when both bounds are violated (then erpf2_A_side is returned).
SelectedVariant select_variant(double alpha, double alpha_K, double alpha_A);

enum class Variant { rpf, erpf1, erpf2, erpf2_alt, automatic };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view name);

/// How the inner solve of one side is carried out.
enum class SideMethod { augmented, stationary, projected };

std::string_view to_string(SideMethod m) noexcept;

/// Which operator stands in for A^{-1} inside the projected A-side.
enum class ProjectedASolve {
  block_policy,    // the A-block inner solver spec (direct or ic)
  tilde_diagonal,  // diag(A_tilde)^{-1}, consistent with the sparse Schur surrogate
};

struct PreconditionerConfig {
  RpfConfig rpf;
  Variant variant = Variant::automatic;
  Index n_in = 2;
  ProjectedASolve projected_A_solve = ProjectedASolve::tilde_diagonal;
};

/// RPF with the per-side inner solves chosen by the variant policy.
class Preconditioner {
 public:
  Preconditioner(const ThreeFieldSystem& sys, const PreconditionerConfig& cfg);

  BlockVector apply(const BlockVector& r) const;
  /// Flat (u, q, p) interface for the Krylov solver.
  LinearOperator as_operator() const;

  const RpfOperator& rpf() const noexcept { return op_; }
  const RpfParameters& params() const noexcept { return op_.params; }
  SideMethod k_method() const noexcept { return k_method_; }
  SideMethod a_method() const noexcept { return a_method_; }
  Variant variant() const noexcept { return variant_; }
  /// select_variant on the set-up parameters.
  SelectedVariant selected() const noexcept { return selected_; }
  const std::optional<AugmentedBlockContext>& context_K() const noexcept { return ctx_K_; }
  const std::optional<AugmentedBlockContext>& context_A() const noexcept { return ctx_A_; }

 private:
  RpfOperator op_;
  Variant variant_;
  SelectedVariant selected_;
  SideMethod k_method_ = SideMethod::augmented;
  SideMethod a_method_ = SideMethod::augmented;
  std::optional<AugmentedBlockContext> ctx_K_;
  std::optional<AugmentedBlockContext> ctx_A_;
};

}  // namespace erpf

#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "erpf/sparse.hpp"

namespace erpf {

/// "Apply an approximate inverse to a vector." Every inner solve of the
/// preconditioners goes through this contract. Implementations are immutable
/// after construction; apply() is safe to call concurrently as long as each
/// caller owns its output buffer.
class InnerSolver {
 public:
  virtual ~InnerSolver() = default;

  virtual Index dim() const noexcept = 0;
  virtual std::string_view kind() const noexcept = 0;
  /// x = M^{-1} b (approximately, depending on the kind).
  virtual void apply(std::span<const double> b, std::span<double> x) const = 0;

  Vector apply(std::span<const double> b) const {
    Vector x(b.size());
    apply(b, x);
    return x;
  }
};

using InnerSolverPtr = std::shared_ptr<const InnerSolver>;

enum class Ordering { natural, amd, rcm };

/// Permutation `perm` with perm[new] = old.
std::vector<Index> compute_ordering(const CsrMatrix& m, Ordering ordering);
/// Reverse Cuthill-McKee on the symmetric pattern of m.
std::vector<Index> reverse_cuthill_mckee(const CsrMatrix& m);

/// Sparse lower-triangular factor stored column by column (CSC), diagonal first
/// in each column, rows sorted ascending. Applies (L L^T)^{-1} in the permuted
/// numbering given by `perm`.
struct TriangularFactor {
  Index n = 0;
  std::vector<Index> col_offsets{0};
  std::vector<Index> row_indices;
  std::vector<double> values;
  std::vector<Index> perm;  // perm[new] = old; empty means identity

  Index nnz() const noexcept { return static_cast<Index>(values.size()); }
  void solve(std::span<const double> b, std::span<double> x) const;
  /// L in the permuted numbering as a CSR matrix (row i holds L(i, :)).
  CsrMatrix lower() const;
};

/// Exact sparse Cholesky, L L^T = P M P^T. Throws FactorizationError
/// ("matrix not SPD") with the pivot index in the original numbering.
class CholeskySolver final : public InnerSolver {
 public:
  explicit CholeskySolver(const CsrMatrix& m, Ordering ordering = Ordering::amd);

  Index dim() const noexcept override { return factor_.n; }
  std::string_view kind() const noexcept override { return "direct-cholesky"; }
  void apply(std::span<const double> b, std::span<double> x) const override;
  using InnerSolver::apply;

  const TriangularFactor& factor() const noexcept { return factor_; }

 private:
  TriangularFactor factor_;
};

struct IcOptions {
  /// Breakdown shifts tried in order on M + sigma * diag(M).
  std::vector<double> shifts{1e-8, 1e-6, 1e-4, 1e-2};
  bool rcm = false;
};

/// Limited-memory incomplete Cholesky. Column j of L keeps every position of
/// the lower triangle of M plus at most `rho` fill entries, chosen by largest
/// magnitude (ties go to the smaller row index). rho = 0 is IC(0).
class IncompleteCholeskySolver final : public InnerSolver {
 public:
  IncompleteCholeskySolver(const CsrMatrix& m, Index rho, IcOptions options = {});

  Index dim() const noexcept override { return factor_.n; }
  std::string_view kind() const noexcept override { return "incomplete-cholesky"; }
  void apply(std::span<const double> b, std::span<double> x) const override;
  using InnerSolver::apply;

  Index rho() const noexcept { return rho_; }
  /// Diagonal shift that produced the factor (0 when none was needed).
  double shift() const noexcept { return shift_; }
  const TriangularFactor& factor() const noexcept { return factor_; }

 private:
  TriangularFactor factor_;
  Index rho_;
  double shift_ = 0.0;
};

/// x_i = b_i / d_i.
class DiagonalSolver final : public InnerSolver {
 public:
  explicit DiagonalSolver(std::span<const double> d);

  Index dim() const noexcept override { return static_cast<Index>(inv_.size()); }
  std::string_view kind() const noexcept override { return "diagonal"; }
  void apply(std::span<const double> b, std::span<double> x) const override;
  using InnerSolver::apply;

 private:
  Vector inv_;
};

InnerSolverPtr cholesky_factor(const CsrMatrix& m, Ordering ordering = Ordering::amd);
InnerSolverPtr ic_factor(const CsrMatrix& m, Index rho, IcOptions options = {});
InnerSolverPtr diagonal_solver(std::span<const double> d);

}  // namespace erpf

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace erpf {

using Index = std::int64_t;
using Vector = std::vector<double>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Row-major dense matrix. Only used by small-scale oracles and diagnostics.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double fill = 0.0);
  DenseMatrix(Index rows, Index cols, std::vector<double> values);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  double& operator()(Index i, Index j) { return values_[static_cast<std::size_t>(i * cols_ + j)]; }
  double operator()(Index i, Index j) const { return values_[static_cast<std::size_t>(i * cols_ + j)]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> values_;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
/// Immutable once built. Explicitly stored zeros are kept.
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_(1, 0) {}

  /// Takes ownership of raw CSR arrays and validates every structural invariant.
  CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
            std::vector<double> values);

  /// Builds from unordered triplets; duplicates are summed.
  static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  static CsrMatrix identity(Index n);
  static CsrMatrix diagonal(std::span<const double> d);
  static CsrMatrix zeros(Index rows, Index cols);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }
  bool square() const noexcept { return rows_ == cols_; }

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Stored value at (i, j), or 0 when the position is not in the pattern.
  double at(Index i, Index j) const;

  /// y = M x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y += s * M x
  void multiply_add(double s, std::span<const double> x, std::span<double> y) const;
  /// y = M^T x, without forming the transpose.
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

  CsrMatrix transpose() const;
  double max_abs() const noexcept;
  /// Max row absolute sum.
  double norm_inf() const noexcept;

  /// Returns diag(s) * M.
  CsrMatrix scale_rows(std::span<const double> s) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

Vector spmv(const CsrMatrix& m, std::span<const double> x);
Vector spmv_t(const CsrMatrix& m, std::span<const double> x);
CsrMatrix spgemm(const CsrMatrix& left, const CsrMatrix& right);
/// left + s * right on the union pattern.
CsrMatrix add_scaled(const CsrMatrix& left, double s, const CsrMatrix& right);
Vector diagonal_of(const CsrMatrix& m);

inline constexpr std::size_t kDenseOracleBudget = 4'000'000;

DenseMatrix to_dense(const CsrMatrix& m, std::size_t budget = kDenseOracleBudget);
/// Keeps every entry with |value| > drop_tol (all non-zeros by default).
CsrMatrix from_dense(const DenseMatrix& d, double drop_tol = 0.0);

/// max |M - M^T| over stored entries of either.
double symmetry_defect(const CsrMatrix& m);

// Small dense-vector helpers shared across modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += s * x
void axpy(double s, std::span<const double> x, std::span<double> y);

}  // namespace erpf

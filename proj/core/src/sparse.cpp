#include "erpf/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "erpf/errors.hpp"

namespace erpf {

namespace {

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

void require_length(std::span<const double> v, Index n, const char* what) {
  if (static_cast<Index>(v.size()) != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols), values_(uz(rows * cols), fill) {
  if (rows < 0 || cols < 0) throw DimensionError("DenseMatrix: negative dimension");
}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 0 || cols < 0 || static_cast<Index>(values_.size()) != rows * cols) {
    throw DimensionError("DenseMatrix: value count does not match dimensions");
  }
}

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
                     std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (rows < 0 || cols < 0) throw InputError("CsrMatrix: negative dimension");
  if (static_cast<Index>(row_offsets_.size()) != rows + 1) {
    throw InputError("CsrMatrix: row_offsets must have rows+1 entries");
  }
  if (row_offsets_.front() != 0) throw InputError("CsrMatrix: row_offsets must start at 0");
  if (col_indices_.size() != values_.size() ||
      row_offsets_.back() != static_cast<Index>(values_.size())) {
    throw InputError("CsrMatrix: last row offset must equal the number of stored values");
  }
  for (Index i = 0; i < rows; ++i) {
    const Index b = row_offsets_[uz(i)];
    const Index e = row_offsets_[uz(i + 1)];
    if (e < b) throw InputError("CsrMatrix: row_offsets must be non-decreasing");
    for (Index k = b; k < e; ++k) {
      const Index c = col_indices_[uz(k)];
      if (c < 0 || c >= cols) {
        throw InputError("CsrMatrix: column index out of range in row " + std::to_string(i));
      }
      if (k > b && col_indices_[uz(k - 1)] >= c) {
        throw InputError("CsrMatrix: column indices must be strictly increasing in row " +
                         std::to_string(i));
      }
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw InputError("from_triplets: entry (" + std::to_string(t.row) + ", " +
                       std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(uz(rows + 1), 0);
  std::vector<Index> cols_out;
  std::vector<double> vals;
  cols_out.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size();) {
    const Index r = triplets[k].row;
    const Index c = triplets[k].col;
    double v = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) {
      v += triplets[k].value;
    }
    cols_out.push_back(c);
    vals.push_back(v);
    ++offsets[uz(r + 1)];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return CsrMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

CsrMatrix CsrMatrix::identity(Index n) {
  Vector ones(uz(n), 1.0);
  return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
  const auto n = static_cast<Index>(d.size());
  std::vector<Index> offsets(uz(n + 1));
  std::vector<Index> cols(uz(n));
  std::iota(offsets.begin(), offsets.end(), Index{0});
  std::iota(cols.begin(), cols.end(), Index{0});
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), Vector(d.begin(), d.end()));
}

CsrMatrix CsrMatrix::zeros(Index rows, Index cols) {
  return CsrMatrix(rows, cols, std::vector<Index>(uz(rows + 1), 0), {}, {});
}

double CsrMatrix::at(Index i, Index j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw DimensionError("CsrMatrix::at out of range");
  const auto b = col_indices_.begin() + row_offsets_[uz(i)];
  const auto e = col_indices_.begin() + row_offsets_[uz(i + 1)];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[uz(it - col_indices_.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require_length(x, cols_, "spmv input");
  require_length(y, rows_, "spmv output");
  for (Index i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (Index k = row_offsets_[uz(i)]; k < row_offsets_[uz(i + 1)]; ++k) {
      sum += values_[uz(k)] * x[uz(col_indices_[uz(k)])];
    }
    y[uz(i)] = sum;
  }
}

void CsrMatrix::multiply_add(double s, std::span<const double> x, std::span<double> y) const {
  require_length(x, cols_, "spmv input");
  require_length(y, rows_, "spmv output");
  for (Index i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (Index k = row_offsets_[uz(i)]; k < row_offsets_[uz(i + 1)]; ++k) {
      sum += values_[uz(k)] * x[uz(col_indices_[uz(k)])];
    }
    y[uz(i)] += s * sum;
  }
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  require_length(x, rows_, "spmv_t input");
  require_length(y, cols_, "spmv_t output");
  std::fill(y.begin(), y.end(), 0.0);
  for (Index i = 0; i < rows_; ++i) {
    const double xi = x[uz(i)];
    if (xi == 0.0) continue;
    for (Index k = row_offsets_[uz(i)]; k < row_offsets_[uz(i + 1)]; ++k) {
      y[uz(col_indices_[uz(k)])] += values_[uz(k)] * xi;
    }
  }
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Index> offsets(uz(cols_ + 1), 0);
  for (Index c : col_indices_) ++offsets[uz(c + 1)];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<Index> next(offsets.begin(), offsets.end() - 1);
  std::vector<Index> cols(values_.size());
  Vector vals(values_.size());
  // Rows are visited in order, so each output row receives sorted indices.
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_offsets_[uz(i)]; k < row_offsets_[uz(i + 1)]; ++k) {
      const Index dst = next[uz(col_indices_[uz(k)])]++;
      cols[uz(dst)] = i;
      vals[uz(dst)] = values_[uz(k)];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(offsets), std::move(cols), std::move(vals));
}

double CsrMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::norm_inf() const noexcept {
  double m = 0.0;
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index k = row_offsets_[uz(i)]; k < row_offsets_[uz(i + 1)]; ++k) s += std::abs(values_[uz(k)]);
    m = std::max(m, s);
  }
  return m;
}

CsrMatrix CsrMatrix::scale_rows(std::span<const double> s) const {
  require_length(s, rows_, "scale_rows");
  Vector vals(values_);
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_offsets_[uz(i)]; k < row_offsets_[uz(i + 1)]; ++k) vals[uz(k)] *= s[uz(i)];
  }
  return CsrMatrix(rows_, cols_, row_offsets_, col_indices_, std::move(vals));
}

Vector spmv(const CsrMatrix& m, std::span<const double> x) {
  Vector y(uz(m.rows()));
  m.multiply(x, y);
  return y;
}

Vector spmv_t(const CsrMatrix& m, std::span<const double> x) {
  Vector y(uz(m.cols()));
  m.multiply_transpose(x, y);
  return y;
}

CsrMatrix spgemm(const CsrMatrix& left, const CsrMatrix& right) {
  if (left.cols() != right.rows()) {
    throw DimensionError("spgemm: inner dimensions " + std::to_string(left.cols()) + " and " +
                         std::to_string(right.rows()) + " differ");
  }
  const Index n_rows = left.rows();
  const Index n_cols = right.cols();
  const auto lo = left.row_offsets();
  const auto lc = left.col_indices();
  const auto lv = left.values();
  const auto ro = right.row_offsets();
  const auto rc = right.col_indices();
  const auto rv = right.values();

  // Gustavson's row-by-row product with a dense marker.
  std::vector<Index> marker(uz(n_cols), -1);
  Vector acc(uz(n_cols), 0.0);
  std::vector<Index> offsets(uz(n_rows + 1), 0);
  std::vector<Index> cols;
  Vector vals;
  std::vector<Index> row_cols;
  for (Index i = 0; i < n_rows; ++i) {
    row_cols.clear();
    for (Index a = lo[uz(i)]; a < lo[uz(i + 1)]; ++a) {
      const Index k = lc[uz(a)];
      const double lik = lv[uz(a)];
      for (Index b = ro[uz(k)]; b < ro[uz(k + 1)]; ++b) {
        const Index j = rc[uz(b)];
        if (marker[uz(j)] != i) {
          marker[uz(j)] = i;
          acc[uz(j)] = 0.0;
          row_cols.push_back(j);
        }
        acc[uz(j)] += lik * rv[uz(b)];
      }
    }
    std::sort(row_cols.begin(), row_cols.end());
    for (Index j : row_cols) {
      cols.push_back(j);
      vals.push_back(acc[uz(j)]);
    }
    offsets[uz(i + 1)] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix add_scaled(const CsrMatrix& left, double s, const CsrMatrix& right) {
  if (left.rows() != right.rows() || left.cols() != right.cols()) {
    throw DimensionError("add_scaled: operands have different shapes");
  }
  const auto lo = left.row_offsets();
  const auto lc = left.col_indices();
  const auto lv = left.values();
  const auto ro = right.row_offsets();
  const auto rc = right.col_indices();
  const auto rv = right.values();
  std::vector<Index> offsets(uz(left.rows() + 1), 0);
  std::vector<Index> cols;
  Vector vals;
  cols.reserve(uz(left.nnz() + right.nnz()));
  vals.reserve(uz(left.nnz() + right.nnz()));
  for (Index i = 0; i < left.rows(); ++i) {
    Index a = lo[uz(i)];
    Index b = ro[uz(i)];
    const Index ae = lo[uz(i + 1)];
    const Index be = ro[uz(i + 1)];
    while (a < ae || b < be) {
      const Index ca = a < ae ? lc[uz(a)] : left.cols();
      const Index cb = b < be ? rc[uz(b)] : left.cols();
      if (ca == cb) {
        cols.push_back(ca);
        vals.push_back(lv[uz(a++)] + s * rv[uz(b++)]);
      } else if (ca < cb) {
        cols.push_back(ca);
        vals.push_back(lv[uz(a++)]);
      } else {
        cols.push_back(cb);
        vals.push_back(s * rv[uz(b++)]);
      }
    }
    offsets[uz(i + 1)] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(left.rows(), left.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

Vector diagonal_of(const CsrMatrix& m) {
  if (!m.square()) throw DimensionError("diagonal_of: matrix is not square");
  Vector d(uz(m.rows()), 0.0);
  for (Index i = 0; i < m.rows(); ++i) d[uz(i)] = m.at(i, i);
  return d;
}

DenseMatrix to_dense(const CsrMatrix& m, std::size_t budget) {
  if (static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()) > budget) {
    throw BudgetError("to_dense: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                      " exceeds the dense oracle budget of " + std::to_string(budget) + " entries");
  }
  DenseMatrix d(m.rows(), m.cols());
  const auto o = m.row_offsets();
  const auto c = m.col_indices();
  const auto v = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = o[uz(i)]; k < o[uz(i + 1)]; ++k) d(i, c[uz(k)]) = v[uz(k)];
  }
  return d;
}

CsrMatrix from_dense(const DenseMatrix& d, double drop_tol) {
  std::vector<Index> offsets(uz(d.rows() + 1), 0);
  std::vector<Index> cols;
  Vector vals;
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      if (std::abs(d(i, j)) > drop_tol) {
        cols.push_back(j);
        vals.push_back(d(i, j));
      }
    }
    offsets[uz(i + 1)] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(d.rows(), d.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

double symmetry_defect(const CsrMatrix& m) {
  if (!m.square()) throw DimensionError("symmetry_defect: matrix is not square");
  const CsrMatrix diff = add_scaled(m, -1.0, m.transpose());
  return diff.max_abs();
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double s, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace erpf

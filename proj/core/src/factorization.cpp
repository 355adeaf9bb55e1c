#include "erpf/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include "erpf/errors.hpp"

namespace erpf {

namespace {

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

void require_square_symmetric_pattern(const CsrMatrix& m, const char* who) {
  if (!m.square()) throw DimensionError(std::string(who) + ": matrix is not square");
}

std::vector<Index> invert(const std::vector<Index>& perm) {
  std::vector<Index> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[uz(perm[k])] = static_cast<Index>(k);
  return inv;
}

// Entries (new_col, value) of row `new_row` of P M P^T.
struct PermutedRows {
  std::vector<Index> offsets;
  std::vector<Index> cols;
  std::vector<double> vals;
};

PermutedRows permute_symmetric(const CsrMatrix& m, const std::vector<Index>& perm) {
  const Index n = m.rows();
  const auto pinv = invert(perm);
  const auto o = m.row_offsets();
  const auto c = m.col_indices();
  const auto v = m.values();
  PermutedRows out;
  out.offsets.assign(uz(n + 1), 0);
  out.cols.reserve(uz(m.nnz()));
  out.vals.reserve(uz(m.nnz()));
  std::vector<std::pair<Index, double>> row;
  for (Index k = 0; k < n; ++k) {
    const Index old = perm[uz(k)];
    row.clear();
    for (Index q = o[uz(old)]; q < o[uz(old + 1)]; ++q) row.emplace_back(pinv[uz(c[uz(q)])], v[uz(q)]);
    std::sort(row.begin(), row.end());
    for (const auto& [col, val] : row) {
      out.cols.push_back(col);
      out.vals.push_back(val);
    }
    out.offsets[uz(k + 1)] = static_cast<Index>(out.cols.size());
  }
  return out;
}

// Non-zero pattern of row k of L via the elimination tree (CSparse's ereach).
// Fills s[top..n) in topological order and returns top.
Index ereach(const PermutedRows& c, Index k, const std::vector<Index>& parent, std::vector<Index>& s,
             std::vector<Index>& mark, Index n) {
  Index top = n;
  mark[uz(k)] = k;
  for (Index q = c.offsets[uz(k)]; q < c.offsets[uz(k + 1)]; ++q) {
    Index i = c.cols[uz(q)];
    if (i > k) break;
    Index len = 0;
    for (; mark[uz(i)] != k; i = parent[uz(i)]) {
      s[uz(len++)] = i;
      mark[uz(i)] = k;
    }
    while (len > 0) s[uz(--top)] = s[uz(--len)];
  }
  return top;
}

std::vector<Index> etree(const PermutedRows& c, Index n) {
  std::vector<Index> parent(uz(n), -1);
  std::vector<Index> ancestor(uz(n), -1);
  for (Index k = 0; k < n; ++k) {
    for (Index q = c.offsets[uz(k)]; q < c.offsets[uz(k + 1)]; ++q) {
      Index i = c.cols[uz(q)];
      if (i >= k) break;
      while (i != -1 && i < k) {
        const Index next = ancestor[uz(i)];
        ancestor[uz(i)] = k;
        if (next == -1) parent[uz(i)] = k;
        i = next;
      }
    }
  }
  return parent;
}

struct Breakdown {
  Index pivot;  // permuted numbering
};

TriangularFactor incomplete_factor(const PermutedRows& c, Index n, Index rho, double shift) {
  TriangularFactor f;
  f.n = n;
  f.col_offsets.assign(1, 0);
  std::vector<Index> first(uz(n), 0);
  std::vector<std::vector<Index>> pending(uz(n));
  Vector w(uz(n), 0.0);
  std::vector<char> state(uz(n), 0);  // 0 = absent, 1 = original, 2 = fill
  std::vector<Index> pattern;
  std::vector<Index> fill;
  std::vector<Index> keep;

  for (Index j = 0; j < n; ++j) {
    pattern.clear();
    bool has_diag = false;
    for (Index q = c.offsets[uz(j)]; q < c.offsets[uz(j + 1)]; ++q) {
      const Index i = c.cols[uz(q)];
      if (i < j) continue;
      double v = c.vals[uz(q)];
      if (i == j) {
        v += shift * std::abs(v);
        has_diag = true;
      }
      w[uz(i)] = v;
      state[uz(i)] = 1;
      pattern.push_back(i);
    }
    if (!has_diag) {
      w[uz(j)] = 0.0;
      state[uz(j)] = 1;
      pattern.push_back(j);
    }

    for (Index k : pending[uz(j)]) {
      const Index pos = first[uz(k)];
      const double ljk = f.values[uz(pos)];
      const Index end = f.col_offsets[uz(k + 1)];
      for (Index q = pos; q < end; ++q) {
        const Index i = f.row_indices[uz(q)];
        if (state[uz(i)] == 0) {
          state[uz(i)] = 2;
          w[uz(i)] = 0.0;
          pattern.push_back(i);
        }
        w[uz(i)] -= f.values[uz(q)] * ljk;
      }
      if (pos + 1 < end) {
        first[uz(k)] = pos + 1;
        pending[uz(f.row_indices[uz(pos + 1)])].push_back(k);
      }
    }
    pending[uz(j)].clear();
    pending[uz(j)].shrink_to_fit();

    const double d = w[uz(j)];
    if (!(d > 0.0) || !std::isfinite(d)) {
      for (Index i : pattern) state[uz(i)] = 0;
      throw Breakdown{j};
    }
    const double ljj = std::sqrt(d);

    keep.clear();
    fill.clear();
    for (Index i : pattern) {
      if (i == j) continue;
      (state[uz(i)] == 1 ? keep : fill).push_back(i);
    }
    if (static_cast<Index>(fill.size()) > rho) {
      const auto by_magnitude = [&](Index a, Index b) {
        const double ma = std::abs(w[uz(a)]);
        const double mb = std::abs(w[uz(b)]);
        return ma != mb ? ma > mb : a < b;
      };
      std::nth_element(fill.begin(), fill.begin() + rho, fill.end(), by_magnitude);
      fill.resize(uz(rho));
    }
    keep.insert(keep.end(), fill.begin(), fill.end());
    std::sort(keep.begin(), keep.end());

    f.row_indices.push_back(j);
    f.values.push_back(ljj);
    for (Index i : keep) {
      f.row_indices.push_back(i);
      f.values.push_back(w[uz(i)] / ljj);
    }
    const Index col_begin = f.col_offsets.back();
    f.col_offsets.push_back(static_cast<Index>(f.values.size()));
    if (!keep.empty()) {
      first[uz(j)] = col_begin + 1;
      pending[uz(keep.front())].push_back(j);
    }
    for (Index i : pattern) state[uz(i)] = 0;
  }
  return f;
}

}  // namespace

std::vector<Index> reverse_cuthill_mckee(const CsrMatrix& m) {
  require_square_symmetric_pattern(m, "reverse_cuthill_mckee");
  const Index n = m.rows();
  const auto o = m.row_offsets();
  const auto c = m.col_indices();
  std::vector<Index> degree(uz(n));
  for (Index i = 0; i < n; ++i) degree[uz(i)] = o[uz(i + 1)] - o[uz(i)];
  std::vector<char> visited(uz(n), 0);
  std::vector<Index> order;
  order.reserve(uz(n));
  std::vector<Index> nbrs;
  for (;;) {
    // Start each component at an unvisited vertex of minimum degree.
    Index start = -1;
    for (Index i = 0; i < n; ++i) {
      if (!visited[uz(i)] && (start < 0 || degree[uz(i)] < degree[uz(start)])) start = i;
    }
    if (start < 0) break;
    std::deque<Index> queue{start};
    visited[uz(start)] = 1;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      order.push_back(v);
      nbrs.clear();
      for (Index q = o[uz(v)]; q < o[uz(v + 1)]; ++q) {
        const Index u = c[uz(q)];
        if (!visited[uz(u)]) {
          visited[uz(u)] = 1;
          nbrs.push_back(u);
        }
      }
      std::sort(nbrs.begin(), nbrs.end(), [&](Index a, Index b) {
        return degree[uz(a)] != degree[uz(b)] ? degree[uz(a)] < degree[uz(b)] : a < b;
      });
      queue.insert(queue.end(), nbrs.begin(), nbrs.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

std::vector<Index> compute_ordering(const CsrMatrix& m, Ordering ordering) {
  require_square_symmetric_pattern(m, "compute_ordering");
  const Index n = m.rows();
  switch (ordering) {
    case Ordering::natural: {
      std::vector<Index> perm(uz(n));
      std::iota(perm.begin(), perm.end(), Index{0});
      return perm;
    }
    case Ordering::rcm:
      return reverse_cuthill_mckee(m);
    case Ordering::amd: {
      using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
      std::vector<Eigen::Triplet<double, int>> trips;
      trips.reserve(uz(m.nnz()));
      const auto o = m.row_offsets();
      const auto c = m.col_indices();
      for (Index i = 0; i < n; ++i) {
        for (Index q = o[uz(i)]; q < o[uz(i + 1)]; ++q) {
          trips.emplace_back(static_cast<int>(i), static_cast<int>(c[uz(q)]), 1.0);
        }
      }
      EigenSparse pattern(static_cast<int>(n), static_cast<int>(n));
      pattern.setFromTriplets(trips.begin(), trips.end());
      Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p;
      Eigen::AMDOrdering<int> amd;
      amd(pattern, p);
      std::vector<Index> perm(uz(n));
      for (Index k = 0; k < n; ++k) perm[uz(k)] = p.indices()[static_cast<int>(k)];
      return perm;
    }
  }
  return {};
}

void TriangularFactor::solve(std::span<const double> b, std::span<double> x) const {
  if (static_cast<Index>(b.size()) != n || static_cast<Index>(x.size()) != n) {
    throw DimensionError("triangular solve: length mismatch");
  }
  Vector y(uz(n));
  if (perm.empty()) {
    std::copy(b.begin(), b.end(), y.begin());
  } else {
    for (Index k = 0; k < n; ++k) y[uz(k)] = b[uz(perm[uz(k)])];
  }
  for (Index j = 0; j < n; ++j) {
    const Index begin = col_offsets[uz(j)];
    const double yj = (y[uz(j)] /= values[uz(begin)]);
    for (Index q = begin + 1; q < col_offsets[uz(j + 1)]; ++q) y[uz(row_indices[uz(q)])] -= values[uz(q)] * yj;
  }
  for (Index j = n - 1; j >= 0; --j) {
    const Index begin = col_offsets[uz(j)];
    double s = y[uz(j)];
    for (Index q = begin + 1; q < col_offsets[uz(j + 1)]; ++q) s -= values[uz(q)] * y[uz(row_indices[uz(q)])];
    y[uz(j)] = s / values[uz(begin)];
  }
  if (perm.empty()) {
    std::copy(y.begin(), y.end(), x.begin());
  } else {
    for (Index k = 0; k < n; ++k) x[uz(perm[uz(k)])] = y[uz(k)];
  }
}

CsrMatrix TriangularFactor::lower() const {
  std::vector<Triplet> trips;
  trips.reserve(values.size());
  for (Index j = 0; j < n; ++j) {
    for (Index q = col_offsets[uz(j)]; q < col_offsets[uz(j + 1)]; ++q) {
      trips.push_back({row_indices[uz(q)], j, values[uz(q)]});
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(trips));
}

CholeskySolver::CholeskySolver(const CsrMatrix& m, Ordering ordering) {
  require_square_symmetric_pattern(m, "cholesky_factor");
  const Index n = m.rows();
  std::vector<Index> perm = compute_ordering(m, ordering);
  const PermutedRows c = permute_symmetric(m, perm);
  const std::vector<Index> parent = etree(c, n);

  std::vector<Index> s(uz(n));
  std::vector<Index> mark(uz(n), -1);
  std::vector<Index> counts(uz(n), 1);
  for (Index k = 0; k < n; ++k) {
    const Index top = ereach(c, k, parent, s, mark, n);
    for (Index p = top; p < n; ++p) ++counts[uz(s[uz(p)])];
  }

  factor_.n = n;
  factor_.col_offsets.assign(uz(n + 1), 0);
  std::partial_sum(counts.begin(), counts.end(), factor_.col_offsets.begin() + 1);
  factor_.row_indices.assign(uz(factor_.col_offsets.back()), 0);
  factor_.values.assign(uz(factor_.col_offsets.back()), 0.0);

  std::vector<Index> next(factor_.col_offsets.begin(), factor_.col_offsets.end() - 1);
  std::fill(mark.begin(), mark.end(), -1);
  Vector x(uz(n), 0.0);
  auto& li = factor_.row_indices;
  auto& lx = factor_.values;
  const auto& lp = factor_.col_offsets;
  for (Index k = 0; k < n; ++k) {
    const Index top = ereach(c, k, parent, s, mark, n);
    for (Index q = c.offsets[uz(k)]; q < c.offsets[uz(k + 1)]; ++q) {
      const Index i = c.cols[uz(q)];
      if (i > k) break;
      x[uz(i)] = c.vals[uz(q)];
    }
    double d = x[uz(k)];
    x[uz(k)] = 0.0;
    for (Index p = top; p < n; ++p) {
      const Index i = s[uz(p)];
      const double lki = x[uz(i)] / lx[uz(lp[uz(i)])];
      x[uz(i)] = 0.0;
      for (Index q = lp[uz(i)] + 1; q < next[uz(i)]; ++q) x[uz(li[uz(q)])] -= lx[uz(q)] * lki;
      d -= lki * lki;
      const Index q = next[uz(i)]++;
      li[uz(q)] = k;
      lx[uz(q)] = lki;
    }
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw FactorizationError("matrix not SPD (non-positive pivot at row " +
                                   std::to_string(perm[uz(k)]) + ")",
                               perm[uz(k)]);
    }
    const Index q = next[uz(k)]++;
    li[uz(q)] = k;
    lx[uz(q)] = std::sqrt(d);
  }
  factor_.perm = std::move(perm);
}

void CholeskySolver::apply(std::span<const double> b, std::span<double> x) const { factor_.solve(b, x); }

IncompleteCholeskySolver::IncompleteCholeskySolver(const CsrMatrix& m, Index rho, IcOptions options)
    : rho_(rho) {
  require_square_symmetric_pattern(m, "ic_factor");
  if (rho < 0) throw InputError("ic_factor: rho must be non-negative");
  const Index n = m.rows();
  std::vector<Index> perm = compute_ordering(m, options.rcm ? Ordering::rcm : Ordering::natural);
  const PermutedRows c = permute_symmetric(m, perm);

  std::vector<double> shifts{0.0};
  shifts.insert(shifts.end(), options.shifts.begin(), options.shifts.end());
  Index last_pivot = -1;
  for (double sigma : shifts) {
    try {
      factor_ = incomplete_factor(c, n, rho, sigma);
      shift_ = sigma;
      if (options.rcm) factor_.perm = std::move(perm);
      return;
    } catch (const Breakdown& b) {
      last_pivot = perm[uz(b.pivot)];
    }
  }
  throw FactorizationError("incomplete Cholesky breakdown persists after all diagonal shifts (row " +
                               std::to_string(last_pivot) + ")",
                           last_pivot);
}

void IncompleteCholeskySolver::apply(std::span<const double> b, std::span<double> x) const {
  factor_.solve(b, x);
}

DiagonalSolver::DiagonalSolver(std::span<const double> d) : inv_(d.size()) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0) || !std::isfinite(d[i])) {
      throw InputError("diagonal_solver: entry " + std::to_string(i) + " is not positive");
    }
    inv_[i] = 1.0 / d[i];
  }
}

void DiagonalSolver::apply(std::span<const double> b, std::span<double> x) const {
  if (b.size() != inv_.size() || x.size() != inv_.size()) throw DimensionError("diagonal solve: length mismatch");
  for (std::size_t i = 0; i < inv_.size(); ++i) x[i] = b[i] * inv_[i];
}

InnerSolverPtr cholesky_factor(const CsrMatrix& m, Ordering ordering) {
  return std::make_shared<CholeskySolver>(m, ordering);
}

InnerSolverPtr ic_factor(const CsrMatrix& m, Index rho, IcOptions options) {
  return std::make_shared<IncompleteCholeskySolver>(m, rho, std::move(options));
}

InnerSolverPtr diagonal_solver(std::span<const double> d) { return std::make_shared<DiagonalSolver>(d); }

}  // namespace erpf

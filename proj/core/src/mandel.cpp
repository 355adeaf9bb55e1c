#include "erpf/mandel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "erpf/errors.hpp"

namespace erpf {

namespace {

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

struct Layout {
  GridSpec g;

  Index node(Index i, Index j, Index k) const { return i + (g.nx + 1) * (j + (g.ny + 1) * k); }
  Index cell(Index i, Index j, Index k) const { return i + g.nx * (j + g.ny * k); }
  Index xface(Index i, Index j, Index k) const { return i + (g.nx + 1) * (j + g.ny * k); }
  Index yface(Index i, Index j, Index k) const {
    return (g.nx + 1) * g.ny * g.nz + i + g.nx * (j + (g.ny + 1) * k);
  }
  Index zface(Index i, Index j, Index k) const {
    return (g.nx + 1) * g.ny * g.nz + g.nx * (g.ny + 1) * g.nz + i + g.nx * (j + g.ny * k);
  }
};

// Displacement stiffness on the full 27-point node stencil, three components
// per node, filled element by element.
CsrMatrix assemble_stiffness(const Layout& L, const std::vector<double>& ke) {
  const GridSpec& g = L.g;
  const Index nu = 3 * g.nodes();
  std::vector<Index> offsets(uz(nu + 1), 0);
  const auto range = [](Index c, Index n) { return std::make_pair(std::max<Index>(c - 1, 0), std::min(c + 1, n)); };
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const auto [i0, i1] = range(i, g.nx);
        const auto [j0, j1] = range(j, g.ny);
        const auto [k0, k1] = range(k, g.nz);
        const Index len = 3 * (i1 - i0 + 1) * (j1 - j0 + 1) * (k1 - k0 + 1);
        const Index n = L.node(i, j, k);
        for (Index c = 0; c < 3; ++c) offsets[uz(3 * n + c + 1)] = len;
      }
  for (Index r = 0; r < nu; ++r) offsets[uz(r + 1)] += offsets[uz(r)];
  std::vector<Index> cols(uz(offsets.back()));
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const auto [i0, i1] = range(i, g.nx);
        const auto [j0, j1] = range(j, g.ny);
        const auto [k0, k1] = range(k, g.nz);
        const Index n = L.node(i, j, k);
        for (Index c = 0; c < 3; ++c) {
          Index pos = offsets[uz(3 * n + c)];
          for (Index kk = k0; kk <= k1; ++kk)
            for (Index jj = j0; jj <= j1; ++jj)
              for (Index ii = i0; ii <= i1; ++ii)
                for (Index cc = 0; cc < 3; ++cc) cols[uz(pos++)] = 3 * L.node(ii, jj, kk) + cc;
        }
      }
  std::vector<double> vals(cols.size(), 0.0);
  std::array<Index, 24> dofs{};
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        for (Index a = 0; a < 8; ++a) {
          const Index n = L.node(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
          for (Index c = 0; c < 3; ++c) dofs[uz(3 * a + c)] = 3 * n + c;
        }
        for (std::size_t r = 0; r < 24; ++r) {
          const auto begin = cols.begin() + offsets[uz(dofs[r])];
          const auto end = cols.begin() + offsets[uz(dofs[r] + 1)];
          for (std::size_t s = 0; s < 24; ++s) {
            const auto it = std::lower_bound(begin, end, dofs[s]);
            vals[uz(it - cols.begin())] += ke[r * 24 + s];
          }
        }
      }
  return CsrMatrix(nu, nu, std::move(offsets), std::move(cols), std::move(vals));
}

// Rows and columns flagged in `fixed` keep only their diagonal. Returns the
// reduced matrix and adds -M[free, fixed] * ubar to rhs for the free rows.
CsrMatrix eliminate_symmetric(const CsrMatrix& m, const std::vector<char>& fixed, std::span<const double> ubar,
                              std::span<double> rhs) {
  const auto o = m.row_offsets();
  const auto c = m.col_indices();
  const auto v = m.values();
  std::vector<Index> offsets(uz(m.rows() + 1), 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(uz(m.nnz()));
  vals.reserve(uz(m.nnz()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index q = o[uz(r)]; q < o[uz(r + 1)]; ++q) {
      const Index col = c[uz(q)];
      if (fixed[uz(r)]) {
        if (col != r) continue;
        rhs[uz(r)] += v[uz(q)] * ubar[uz(r)];
      } else if (fixed[uz(col)]) {
        rhs[uz(r)] -= v[uz(q)] * ubar[uz(col)];
        continue;
      }
      cols.push_back(col);
      vals.push_back(v[uz(q)]);
    }
    offsets[uz(r + 1)] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

// Drops rows flagged in `fixed`; adds -M[fixed, :]^T ubar to rhs_cols.
CsrMatrix eliminate_rows(const CsrMatrix& m, const std::vector<char>& fixed, std::span<const double> ubar,
                         std::span<double> rhs_cols) {
  const auto o = m.row_offsets();
  const auto c = m.col_indices();
  const auto v = m.values();
  std::vector<Index> offsets(uz(m.rows() + 1), 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index q = o[uz(r)]; q < o[uz(r + 1)]; ++q) {
      if (fixed[uz(r)]) {
        rhs_cols[uz(c[uz(q)])] -= v[uz(q)] * ubar[uz(r)];
        continue;
      }
      cols.push_back(c[uz(q)]);
      vals.push_back(v[uz(q)]);
    }
    offsets[uz(r + 1)] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace

double MaterialParams::lame_lambda() const noexcept {
  return young_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
}

double MaterialParams::shear_modulus() const noexcept { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }

double MaterialParams::permeability_for(double half_width) const noexcept {
  return half_width * half_width * fluid_viscosity /
         (consolidation_time * (lame_lambda() + 2.0 * shear_modulus()));
}

void MaterialParams::validate() const {
  if (!(young_modulus > 0.0)) throw InputError("young_modulus must be positive");
  if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5)) throw InputError("poisson_ratio must lie in (0, 0.5)");
  if (!(biot_coefficient > 0.0)) throw InputError("biot_coefficient must be positive");
  if (!(permeability >= 0.0)) throw InputError("permeability must be positive (or 0 for the default)");
  if (!(fluid_viscosity > 0.0)) throw InputError("fluid_viscosity must be positive");
  if (!(storage_coefficient >= 0.0)) throw InputError("storage_coefficient must be non-negative");
  if (!(consolidation_time > 0.0)) throw InputError("consolidation_time must be positive");
}

GridSpec GridSpec::mandel(Index a_over_h) {
  if (a_over_h < 10 || a_over_h % 10 != 0) throw InputError("mandel grid: a/h must be a positive multiple of 10");
  return {a_over_h, a_over_h / 10, a_over_h, 1.0, 0.1, 1.0};
}

void GridSpec::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) throw InputError("grid element counts must be at least 1");
  if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0)) throw InputError("grid extents must be positive");
}

ThreeFieldDims expected_dims(const GridSpec& g) { return {3 * g.nodes(), g.faces(), g.cells()}; }

std::vector<double> hex_stiffness(double hx, double hy, double hz, double lambda, double shear) {
  const double gp = 1.0 / std::sqrt(3.0);
  const double det = hx * hy * hz / 8.0;
  std::array<std::array<double, 6>, 6> d{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) d[a][b] = lambda;
    d[a][a] = lambda + 2.0 * shear;
    d[a + 3][a + 3] = shear;
  }
  std::vector<double> ke(24 * 24, 0.0);
  for (int gz = 0; gz < 2; ++gz)
    for (int gy = 0; gy < 2; ++gy)
      for (int gx = 0; gx < 2; ++gx) {
        const double xi = gx ? gp : -gp, eta = gy ? gp : -gp, zeta = gz ? gp : -gp;
        std::array<std::array<double, 24>, 6> bm{};
        for (int a = 0; a < 8; ++a) {
          const double sa = (a & 1) ? 1.0 : -1.0;
          const double ta = ((a >> 1) & 1) ? 1.0 : -1.0;
          const double ua = ((a >> 2) & 1) ? 1.0 : -1.0;
          const double dx = sa * (1 + eta * ta) * (1 + zeta * ua) / 8.0 * 2.0 / hx;
          const double dy = ta * (1 + xi * sa) * (1 + zeta * ua) / 8.0 * 2.0 / hy;
          const double dz = ua * (1 + xi * sa) * (1 + eta * ta) / 8.0 * 2.0 / hz;
          bm[0][3 * a] = dx;
          bm[1][3 * a + 1] = dy;
          bm[2][3 * a + 2] = dz;
          bm[3][3 * a] = dy;
          bm[3][3 * a + 1] = dx;
          bm[4][3 * a + 1] = dz;
          bm[4][3 * a + 2] = dy;
          bm[5][3 * a] = dz;
          bm[5][3 * a + 2] = dx;
        }
        for (int r = 0; r < 24; ++r)
          for (int s = 0; s < 24; ++s) {
            double acc = 0.0;
            for (int p = 0; p < 6; ++p)
              for (int q = 0; q < 6; ++q) acc += bm[p][r] * d[p][q] * bm[q][s];
            ke[static_cast<std::size_t>(r * 24 + s)] += acc * det;
          }
      }
  for (int r = 0; r < 24; ++r)
    for (int s = 0; s < r; ++s) {
      const double avg = 0.5 * (ke[static_cast<std::size_t>(r * 24 + s)] + ke[static_cast<std::size_t>(s * 24 + r)]);
      ke[static_cast<std::size_t>(r * 24 + s)] = ke[static_cast<std::size_t>(s * 24 + r)] = avg;
    }
  return ke;
}

AssembledProblem assemble_three_field(const GridSpec& grid, const MaterialParams& mat, double dt, double theta,
                                      const MandelLoading& loading) {
  grid.validate();
  mat.validate();
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  if (!(theta >= 0.5 && theta <= 1.0)) throw InputError("theta must lie in [1/2, 1]");
  const Layout L{grid};
  const GridSpec& g = grid;
  const double hx = g.lx / static_cast<double>(g.nx);
  const double hy = g.ly / static_cast<double>(g.ny);
  const double hz = g.lz / static_cast<double>(g.nz);
  const double vol = hx * hy * hz;
  const double perm = mat.permeability > 0.0 ? mat.permeability : mat.permeability_for(g.lx);
  const ThreeFieldDims dims = expected_dims(g);

  // Displacement constraints and their prescribed values.
  std::vector<char> ufix(uz(dims.nu), 0);
  Vector ubar(uz(dims.nu), 0.0);
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index n = L.node(i, j, k);
        if (i == 0) ufix[uz(3 * n)] = 1;
        if (j == 0 || j == g.ny) ufix[uz(3 * n + 1)] = 1;
        if (k == 0) ufix[uz(3 * n + 2)] = 1;
        if (k == g.nz) {
          ufix[uz(3 * n + 2)] = 1;
          ubar[uz(3 * n + 2)] = -loading.plate_displacement;
        }
      }
  // Velocity constraints: no flow everywhere except the drained face x = lx.
  std::vector<char> qfix(uz(dims.nq), 0);
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j) qfix[uz(L.xface(0, j, k))] = 1;
  for (Index k = 0; k < g.nz; ++k)
    for (Index i = 0; i < g.nx; ++i) {
      qfix[uz(L.yface(i, 0, k))] = 1;
      qfix[uz(L.yface(i, g.ny, k))] = 1;
    }
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      qfix[uz(L.zface(i, j, 0))] = 1;
      qfix[uz(L.zface(i, j, g.nz))] = 1;
    }
  if (!loading.constrained) {
    std::fill(ufix.begin(), ufix.end(), 0);
    std::fill(ubar.begin(), ubar.end(), 0.0);
    std::fill(qfix.begin(), qfix.end(), 0);
  }

  BlockVector rhs = BlockVector::zeros(dims.nu, dims.nq, dims.np);

  const std::vector<double> ke = hex_stiffness(hx, hy, hz, mat.lame_lambda(), mat.shear_modulus());
  CsrMatrix K = eliminate_symmetric(assemble_stiffness(L, ke), ufix, ubar, rhs.u);

  std::vector<Triplet> qt;
  std::vector<Triplet> at;
  std::vector<Triplet> bt;
  qt.reserve(uz(24 * dims.np));
  at.reserve(uz(12 * dims.np));
  bt.reserve(uz(6 * dims.np));
  const double area[3] = {hy * hz, hx * hz, hx * hy};
  const double mass = mat.fluid_viscosity / perm * vol;
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index c = L.cell(i, j, k);
        for (Index a = 0; a < 8; ++a) {
          const Index ax = a & 1, ay = (a >> 1) & 1, az = (a >> 2) & 1;
          const Index n = L.node(i + ax, j + ay, k + az);
          const Index side[3] = {ax, ay, az};
          for (Index comp = 0; comp < 3; ++comp) {
            const double sign = side[comp] ? 1.0 : -1.0;
            qt.push_back({3 * n + comp, c, mat.biot_coefficient * sign * area[comp] / 4.0});
          }
        }
        const std::array<std::pair<Index, Index>, 3> pairs{{{L.xface(i, j, k), L.xface(i + 1, j, k)},
                                                            {L.yface(i, j, k), L.yface(i, j + 1, k)},
                                                            {L.zface(i, j, k), L.zface(i, j, k + 1)}}};
        for (int d = 0; d < 3; ++d) {
          const auto [lo, hi] = pairs[uz(d)];
          at.push_back({lo, lo, mass / 3.0});
          at.push_back({hi, hi, mass / 3.0});
          at.push_back({lo, hi, mass / 6.0});
          at.push_back({hi, lo, mass / 6.0});
          bt.push_back({lo, c, -area[d]});
          bt.push_back({hi, c, area[d]});
        }
      }
  CsrMatrix Q = eliminate_rows(CsrMatrix::from_triplets(dims.nu, dims.np, std::move(qt)), ufix, ubar, rhs.p);
  const Vector qbar(uz(dims.nq), 0.0);
  CsrMatrix A = eliminate_symmetric(CsrMatrix::from_triplets(dims.nq, dims.nq, std::move(at)), qfix, qbar, rhs.q);
  CsrMatrix B = eliminate_rows(CsrMatrix::from_triplets(dims.nq, dims.np, std::move(bt)), qfix, qbar, rhs.p);
  const Vector pdiag(uz(dims.np), mat.storage_coefficient * vol);
  CsrMatrix P = CsrMatrix::diagonal(pdiag);

  return {ThreeFieldSystem(std::move(K), std::move(A), std::move(P), std::move(Q), std::move(B), theta, dt),
          std::move(rhs)};
}

AssembledProblem assemble_mandel(Index a_over_h, double dt_over_tc, double theta) {
  const MaterialParams mat;
  return assemble_three_field(GridSpec::mandel(a_over_h), mat, dt_over_tc * mat.consolidation_time, theta);
}

}  // namespace erpf

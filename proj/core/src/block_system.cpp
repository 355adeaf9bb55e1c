#include "erpf/block_system.hpp"

#include <cmath>
#include <string>

#include "erpf/errors.hpp"

namespace erpf {

BlockVector BlockVector::zeros(Index nu, Index nq, Index np) {
  return {Vector(static_cast<std::size_t>(nu), 0.0), Vector(static_cast<std::size_t>(nq), 0.0),
          Vector(static_cast<std::size_t>(np), 0.0)};
}

BlockVector BlockVector::from_flat(std::span<const double> flat, Index nu, Index nq, Index np) {
  if (static_cast<Index>(flat.size()) != nu + nq + np) {
    throw DimensionError("BlockVector::from_flat: length mismatch");
  }
  const auto a = static_cast<std::ptrdiff_t>(nu);
  const auto b = static_cast<std::ptrdiff_t>(nu + nq);
  return {Vector(flat.begin(), flat.begin() + a), Vector(flat.begin() + a, flat.begin() + b),
          Vector(flat.begin() + b, flat.end())};
}

Vector BlockVector::flat() const {
  Vector out;
  out.reserve(static_cast<std::size_t>(size()));
  out.insert(out.end(), u.begin(), u.end());
  out.insert(out.end(), q.begin(), q.end());
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

double BlockVector::norm() const {
  return std::sqrt(dot(u, u) + dot(q, q) + dot(p, p));
}

ThreeFieldSystem::ThreeFieldSystem(CsrMatrix K, CsrMatrix A, CsrMatrix P, CsrMatrix Q, CsrMatrix B,
                                   double theta, double dt)
    : K_(std::move(K)), A_(std::move(A)), P_(std::move(P)), Q_(std::move(Q)), B_(std::move(B)),
      theta_(theta), dt_(dt) {
  if (!K_.square()) throw DimensionError("K must be square");
  if (!A_.square()) throw DimensionError("A must be square");
  if (!P_.square()) throw DimensionError("P must be square");
  if (Q_.rows() != nu() || Q_.cols() != np()) {
    throw DimensionError("Q must be " + std::to_string(nu()) + "x" + std::to_string(np()) + ", got " +
                         std::to_string(Q_.rows()) + "x" + std::to_string(Q_.cols()));
  }
  if (B_.rows() != nq() || B_.cols() != np()) {
    throw DimensionError("B must be " + std::to_string(nq()) + "x" + std::to_string(np()) + ", got " +
                         std::to_string(B_.rows()) + "x" + std::to_string(B_.cols()));
  }
  if (symmetry_defect(K_) > kSymmetryTolerance * K_.max_abs()) throw InputError("K is not symmetric");
  if (symmetry_defect(A_) > kSymmetryTolerance * A_.max_abs()) throw InputError("A is not symmetric");
  const auto po = P_.row_offsets();
  const auto pc = P_.col_indices();
  const auto pv = P_.values();
  for (Index i = 0; i < np(); ++i) {
    for (Index k = po[static_cast<std::size_t>(i)]; k < po[static_cast<std::size_t>(i + 1)]; ++k) {
      const double v = pv[static_cast<std::size_t>(k)];
      if (pc[static_cast<std::size_t>(k)] != i && v != 0.0) throw InputError("P is not diagonal");
      if (pc[static_cast<std::size_t>(k)] == i && v < 0.0) throw InputError("P has a negative diagonal entry");
    }
  }
  if (!(theta >= 0.5 && theta <= 1.0)) throw InputError("theta must lie in [1/2, 1]");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive and finite");
}

ThreeFieldSystem ThreeFieldSystem::with_time_step(double theta, double dt) const {
  return ThreeFieldSystem(K_, A_, P_, Q_, B_, theta, dt);
}

void ThreeFieldSystem::check_conforming(const BlockVector& x) const {
  if (static_cast<Index>(x.u.size()) != nu() || static_cast<Index>(x.q.size()) != nq() ||
      static_cast<Index>(x.p.size()) != np()) {
    throw DimensionError("block vector segments (" + std::to_string(x.u.size()) + ", " +
                         std::to_string(x.q.size()) + ", " + std::to_string(x.p.size()) +
                         ") do not match system (" + std::to_string(nu()) + ", " +
                         std::to_string(nq()) + ", " + std::to_string(np()) + ")");
  }
}

BlockVector apply_block_operator(const ThreeFieldSystem& sys, const BlockVector& x) {
  sys.check_conforming(x);
  BlockVector y = BlockVector::zeros(sys.nu(), sys.nq(), sys.np());
  sys.K().multiply(x.u, y.u);
  sys.Q().multiply_add(-1.0, x.p, y.u);
  sys.A().multiply(x.q, y.q);
  sys.B().multiply_add(-1.0, x.p, y.q);
  sys.P().multiply(x.p, y.p);
  Vector tmp(static_cast<std::size_t>(sys.np()));
  sys.Q().multiply_transpose(x.u, tmp);
  axpy(1.0, tmp, y.p);
  sys.B().multiply_transpose(x.q, tmp);
  axpy(sys.gamma(), tmp, y.p);
  return y;
}

std::pair<BlockVector, double> block_residual(const ThreeFieldSystem& sys, const BlockVector& x,
                                              const BlockVector& rhs) {
  sys.check_conforming(rhs);
  BlockVector r = apply_block_operator(sys, x);
  for (std::size_t i = 0; i < r.u.size(); ++i) r.u[i] = rhs.u[i] - r.u[i];
  for (std::size_t i = 0; i < r.q.size(); ++i) r.q[i] = rhs.q[i] - r.q[i];
  for (std::size_t i = 0; i < r.p.size(); ++i) r.p[i] = rhs.p[i] - r.p[i];
  const double n = r.norm();
  return {std::move(r), n};
}

}  // namespace erpf

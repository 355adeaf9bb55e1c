#pragma once

#include <utility>

#include "erpf/sparse.hpp"

namespace erpf {

/// Displacement / velocity / pressure segments of a three-field vector.
struct BlockVector {
  Vector u;
  Vector q;
  Vector p;

  static BlockVector zeros(Index nu, Index nq, Index np);
  /// Splits a concatenated (u, q, p) vector.
  static BlockVector from_flat(std::span<const double> flat, Index nu, Index nq, Index np);

  Index size() const noexcept { return static_cast<Index>(u.size() + q.size() + p.size()); }
  Vector flat() const;
  double norm() const;
};

/// The 3x3 block operator
///
///     [ K     0     -Q ]
///     [ 0     A     -B ]
///     [ Q^T  gB^T    P ]
///
/// with g = gamma = theta * dt. K and A are symmetric, P is diagonal with
/// non-negative entries. Validated on construction and immutable afterwards.
class ThreeFieldSystem {
 public:
  ThreeFieldSystem(CsrMatrix K, CsrMatrix A, CsrMatrix P, CsrMatrix Q, CsrMatrix B, double theta,
                   double dt);

  const CsrMatrix& K() const noexcept { return K_; }
  const CsrMatrix& A() const noexcept { return A_; }
  const CsrMatrix& P() const noexcept { return P_; }
  const CsrMatrix& Q() const noexcept { return Q_; }
  const CsrMatrix& B() const noexcept { return B_; }
  double theta() const noexcept { return theta_; }
  double dt() const noexcept { return dt_; }
  double gamma() const noexcept { return theta_ * dt_; }

  Index nu() const noexcept { return K_.rows(); }
  Index nq() const noexcept { return A_.rows(); }
  Index np() const noexcept { return P_.rows(); }
  Index size() const noexcept { return nu() + nq() + np(); }

  /// Same blocks, different time step.
  ThreeFieldSystem with_time_step(double theta, double dt) const;

  void check_conforming(const BlockVector& x) const;

 private:
  CsrMatrix K_, A_, P_, Q_, B_;
  double theta_;
  double dt_;
};

inline constexpr double kSymmetryTolerance = 1e-12;

/// (Ku - Qp, Aq - Bp, Q^T u + gamma B^T q + P p)
BlockVector apply_block_operator(const ThreeFieldSystem& sys, const BlockVector& x);

/// rhs - A x and its Euclidean norm over all three segments.
std::pair<BlockVector, double> block_residual(const ThreeFieldSystem& sys, const BlockVector& x,
                                              const BlockVector& rhs);

}  // namespace erpf

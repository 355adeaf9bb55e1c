#pragma once

#include "erpf/block_system.hpp"

namespace erpf {

struct MaterialParams {
  double young_modulus = 1.0;      // Pa
  double poisson_ratio = 0.25;
  double biot_coefficient = 1.0;
  double permeability = 0.0;       // m^2; 0 selects the value matching consolidation_time
  double fluid_viscosity = 1.0;    // Pa s
  double storage_coefficient = 0.0;  // 1/Pa
  double consolidation_time = 900.0;  // s

  double lame_lambda() const noexcept;
  double shear_modulus() const noexcept;
  /// Permeability giving t_c = a^2 mu / (k (lambda + 2G)) for half-width a.
  double permeability_for(double half_width) const noexcept;
  void validate() const;
};

struct GridSpec {
  Index nx = 1, ny = 1, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;

  /// a/h x a/(10h) x a/h elements on a 1 x 0.1 x 1 slab.
  static GridSpec mandel(Index a_over_h);
  void validate() const;

  Index nodes() const noexcept { return (nx + 1) * (ny + 1) * (nz + 1); }
  Index cells() const noexcept { return nx * ny * nz; }
  Index faces() const noexcept {
    return (nx + 1) * ny * nz + nx * (ny + 1) * nz + nx * ny * (nz + 1);
  }
};

struct ThreeFieldDims {
  Index nu = 0, nq = 0, np = 0;
  friend bool operator==(const ThreeFieldDims&, const ThreeFieldDims&) = default;
};

ThreeFieldDims expected_dims(const GridSpec& grid);

struct AssembledProblem {
  ThreeFieldSystem system;
  BlockVector rhs;
};

struct MandelLoading {
  /// Prescribed downward displacement of the rigid top plate (m).
  double plate_displacement = 1e-2;
  /// When false no boundary condition is imposed and K, A are singular.
  bool constrained = true;
};

/// Trilinear displacements, lowest-order face velocities and cell pressures on
/// a uniform box grid. Boundary conditions: u_x = 0 on x = 0, u_y = 0 on both
/// y faces, u_z = 0 on z = 0, prescribed uniform u_z on z = lz; no flow on
/// every face except the drained face x = lx. Constrained rows and columns
/// are reduced to their diagonal so every degree of freedom is kept.
AssembledProblem assemble_three_field(const GridSpec& grid, const MaterialParams& mat, double dt,
                                      double theta = 1.0, const MandelLoading& loading = {});

/// Convenience: default materials, dt = dt_over_tc * t_c.
AssembledProblem assemble_mandel(Index a_over_h, double dt_over_tc, double theta = 1.0);

/// 24 x 24 trilinear elasticity stiffness of an hx x hy x hz box (2x2x2 Gauss),
/// row-major, local node a = ax + 2 ay + 4 az, dof 3a + component.
std::vector<double> hex_stiffness(double hx, double hy, double hz, double lambda, double shear);

}  // namespace erpf

#pragma once

#include <filesystem>
#include <functional>
#include <string_view>

#include "erpf/sparse.hpp"

namespace erpf {

/// y = Op(x). x and y never alias.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

LinearOperator as_operator(const CsrMatrix& m);
LinearOperator identity_operator();

enum class SolveStatus { converged, max_iterations, breakdown, stagnation, setup_failure };

std::string_view to_string(SolveStatus s) noexcept;

struct SolveReport {
  Index iterations = 0;
  /// Relative 2-norm residual per iteration; entry 0 is the initial ratio.
  std::vector<double> residual_history;
  double setup_time = 0.0;
  double solve_time = 0.0;
  double total_time = 0.0;
  SolveStatus status = SolveStatus::max_iterations;
  /// ||rhs - A x|| / ||rhs|| recomputed from the returned iterate.
  double final_relative_residual = 0.0;
};

struct BicgstabOptions {
  double tol = 1e-6;
  Index max_it = 1000;
  double breakdown_threshold = 1e-300;
  /// Restarts from the true residual allowed when the recursive residual
  /// claims convergence but the true one does not.
  int max_true_residual_restarts = 3;
};

/// Right-preconditioned Bi-CGStab from a zero initial guess: solves
/// A M^{-1} y = rhs and returns x = M^{-1} y. setup_time is left at zero.
std::pair<Vector, SolveReport> bicgstab(const LinearOperator& apply_op, const LinearOperator& apply_prec,
                                        std::span<const double> rhs, const BicgstabOptions& options = {});

/// Two-column CSV: iteration,relative_residual.
void write_residual_history_csv(const std::filesystem::path& path, std::span<const double> history);

}  // namespace erpf

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "erpf/erpf.hpp"
#include "erpf/krylov.hpp"

namespace erpf {

enum class InnerPolicy { direct, ic };

std::string_view to_string(InnerPolicy p) noexcept;
InnerPolicy parse_inner_policy(std::string_view name);

/// Either the Mandel generator at a given a/h or a saved block-system directory.
struct ProblemSource {
  std::optional<Index> a_over_h;
  std::optional<std::filesystem::path> directory;

  std::string label() const;
};

struct BenchCase {
  ProblemSource source;
  double dt_over_tc = 1e-3;
  /// When set, dt is chosen so that alpha/alpha_K (resp. alpha/alpha_A) hits
  /// the target; dt_over_tc is then ignored.
  std::optional<double> target_ratio_K;
  std::optional<double> target_ratio_A;
  double theta = 1.0;
  Variant variant = Variant::automatic;
  InnerPolicy policy = InnerPolicy::direct;
  Index rho_K = 0;
  Index rho_A = 0;
  Index rho_S = 0;
  Index n_in = 2;
  ProjectedASolve projected_A_solve = ProjectedASolve::tilde_diagonal;
  double tol = 1e-6;
  Index max_it = 1000;
  /// Seeds the random right-hand side used when a loaded system has none.
  std::uint64_t seed = 0;

  void validate() const;
  PreconditionerConfig preconditioner_config() const;
};

struct CaseResult {
  Index index = 0;
  BenchCase bench_case;
  double dt_over_tc = 0.0;
  double alpha = 0.0;
  double alpha_K = 0.0;
  double alpha_A = 0.0;
  std::string selected;  // select_variant on the logged parameters, empty on setup failure
  SolveReport report;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  SolveStatus status = SolveStatus::setup_failure;
  std::string message;
  std::string setup_report;

  double total_seconds() const noexcept { return setup_seconds + solve_seconds; }
  double ratio_K() const noexcept { return alpha_K > 0.0 ? alpha / alpha_K : 0.0; }
  double ratio_A() const noexcept { return alpha_A > 0.0 ? alpha / alpha_A : 0.0; }
};

/// Never throws for problem, setup or solve failures; they end up in `status`
/// and `message`.
CaseResult run_case(const BenchCase& c, Index index = 0);

/// Runs up to `workers` cases concurrently. Results come back in input order.
std::vector<CaseResult> run_sweep(const std::vector<BenchCase>& cases, unsigned workers = 1);

/// JSON sweep file:
///   { "defaults": {...case fields...},
///     "grid":     { field: [values...], ... },   cartesian product over defaults
///     "cases":    [ {...case fields...}, ... ] }  appended after the grid
/// Every resolved case must carry a positive "tol".
std::vector<BenchCase> parse_sweep_config(std::string_view text);
std::vector<BenchCase> load_sweep_config(const std::filesystem::path& path);

/// Header: index,problem,dt_over_tc,alpha_over_alpha_K,alpha_over_alpha_A,variant,selected,
/// policy,n_in,n_it,T_p,T_s,T_t,status,final_residual. Times are wall-clock seconds.
void write_summary_csv(const std::filesystem::path& path, const std::vector<CaseResult>& results);
/// history_<index>.csv and setup_<index>.txt for every case.
void write_case_artifacts(const std::filesystem::path& dir, const std::vector<CaseResult>& results);

}  // namespace erpf

#include "erpf/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "erpf/block_io.hpp"
#include "erpf/errors.hpp"
#include "erpf/mandel.hpp"

namespace erpf {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(InnerPolicy p) noexcept {
  return p == InnerPolicy::direct ? "direct" : "ic";
}

InnerPolicy parse_inner_policy(std::string_view name) {
  if (name == "direct" || name == "M_I") return InnerPolicy::direct;
  if (name == "ic" || name == "M_II") return InnerPolicy::ic;
  throw InputError("unknown inner policy '" + std::string(name) + "'");
}

std::string ProblemSource::label() const {
  if (a_over_h) return "mandel-" + std::to_string(*a_over_h);
  if (directory) return directory->filename().string();
  return "none";
}

void BenchCase::validate() const {
  if (source.a_over_h.has_value() == source.directory.has_value())
    throw InputError("case needs exactly one of a_over_h or directory");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw InputError("tol must be positive");
  if (max_it < 1) throw InputError("max_it must be at least 1");
  if (n_in < 1) throw InputError("n_in must be at least 1");
  if (!(dt_over_tc > 0.0)) throw InputError("dt_over_tc must be positive");
  if (target_ratio_K && target_ratio_A) throw InputError("set at most one target ratio");
  if ((target_ratio_K && !(*target_ratio_K > 0.0)) || (target_ratio_A && !(*target_ratio_A > 0.0)))
    throw InputError("target ratios must be positive");
  if (rho_K < 0 || rho_A < 0 || rho_S < 0) throw InputError("fill parameters must be non-negative");
}

PreconditionerConfig BenchCase::preconditioner_config() const {
  PreconditionerConfig cfg;
  cfg.rpf = policy == InnerPolicy::direct ? RpfConfig::direct_inner()
                                          : RpfConfig::incomplete_inner(rho_K, rho_A, rho_S);
  cfg.variant = variant;
  cfg.n_in = n_in;
  cfg.projected_A_solve = projected_A_solve;
  return cfg;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Problem {
  ThreeFieldSystem system;
  BlockVector rhs;
  double t_c;
};

bool all_zero(const BlockVector& v) {
  for (const Vector* s : {&v.u, &v.q, &v.p})
    for (double x : *s)
      if (x != 0.0) return false;
  return true;
}

double target_gamma(const BenchCase& c, const ThreeFieldSystem& sys) {
  RpfParameters p = estimate_parameters(sys, c.preconditioner_config().rpf);
  return c.target_ratio_K ? gamma_for_ratio_K(p, *c.target_ratio_K) : gamma_for_ratio_A(p, *c.target_ratio_A);
}

Problem build_problem(const BenchCase& c) {
  const bool targeted = c.target_ratio_K || c.target_ratio_A;
  if (c.source.a_over_h) {
    const Index n = *c.source.a_over_h;
    const double t_c = MaterialParams{}.consolidation_time;
    double r = c.dt_over_tc;
    if (targeted) r = target_gamma(c, assemble_mandel(n, 1.0, c.theta).system) / (c.theta * t_c);
    AssembledProblem pb = assemble_mandel(n, r, c.theta);
    return {std::move(pb.system), std::move(pb.rhs), t_c};
  }

  LoadedProblem lp = load_block_system(*c.source.directory);
  const double t_c = lp.consolidation_time.value_or(1.0);
  ThreeFieldSystem sys = std::move(lp.system);
  if (targeted) sys = sys.with_time_step(c.theta, target_gamma(c, sys) / c.theta);
  if (all_zero(lp.rhs)) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Vector* s : {&lp.rhs.u, &lp.rhs.q, &lp.rhs.p})
      for (double& x : *s) x = dist(rng);
  }
  return {std::move(sys), std::move(lp.rhs), t_c};
}

std::string case_header(const BenchCase& c) {
  std::ostringstream os;
  os << "problem = " << c.source.label() << '\n'
     << "variant = " << to_string(c.variant) << '\n'
     << "policy = " << to_string(c.policy) << '\n'
     << "rho = " << c.rho_K << ' ' << c.rho_A << ' ' << c.rho_S << '\n'
     << "n_in = " << c.n_in << '\n'
     << "tol = " << c.tol << '\n'
     << "max_it = " << c.max_it << '\n';
  return os.str();
}

}  // namespace

CaseResult run_case(const BenchCase& c, Index index) {
  CaseResult res;
  res.index = index;
  res.bench_case = c;
  res.setup_report = case_header(c);
  try {
    c.validate();
    Problem pb = build_problem(c);
    res.dt_over_tc = pb.system.dt() / pb.t_c;

    auto t0 = Clock::now();
    Preconditioner M(pb.system, c.preconditioner_config());
    res.setup_seconds = seconds_since(t0);

    const RpfParameters& p = M.params();
    res.alpha = p.alpha;
    res.alpha_K = p.alpha_K;
    res.alpha_A = p.alpha_A;
    res.selected = std::string(to_string(M.selected()));
    std::ostringstream os;
    os << "dt_over_tc = " << res.dt_over_tc << '\n'
       << setup_summary(p) << "selected = " << res.selected << '\n'
       << "K_side = " << to_string(M.k_method()) << '\n'
       << "A_side = " << to_string(M.a_method()) << '\n';
    for (const std::string& w : M.rpf().warnings) os << "warning = " << w << '\n';
    res.setup_report += os.str();

    const ThreeFieldSystem& sys = pb.system;
    LinearOperator op = [&sys](std::span<const double> x, std::span<double> y) {
      Vector v = apply_block_operator(sys, BlockVector::from_flat(x, sys.nu(), sys.nq(), sys.np())).flat();
      std::copy(v.begin(), v.end(), y.begin());
    };
    BicgstabOptions opts;
    opts.tol = c.tol;
    opts.max_it = c.max_it;
    const Vector rhs = pb.rhs.flat();
    auto t1 = Clock::now();
    auto solved = bicgstab(op, M.as_operator(), rhs, opts);
    res.solve_seconds = seconds_since(t1);
    res.report = std::move(solved.second);
    res.status = res.report.status;
  } catch (const std::exception& e) {
    res.status = SolveStatus::setup_failure;
    res.message = e.what();
    res.setup_report += std::string("error = ") + e.what() + '\n';
  }
  return res;
}

std::vector<CaseResult> run_sweep(const std::vector<BenchCase>& cases, unsigned workers) {
  std::vector<CaseResult> out(cases.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) out[i] = run_case(cases[i], static_cast<Index>(i));
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cases.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

namespace {

void apply_field(BenchCase& c, const std::string& key, const json& v) {
  auto number = [&]() {
    if (!v.is_number()) throw InputError("field '" + key + "' must be a number");
    return v.get<double>();
  };
  auto count = [&]() {
    if (!v.is_number_integer()) throw InputError("field '" + key + "' must be an integer");
    return v.get<Index>();
  };
  auto text = [&]() {
    if (!v.is_string()) throw InputError("field '" + key + "' must be a string");
    return v.get<std::string>();
  };
  if (key == "a_over_h") {
    c.source.a_over_h = count();
    c.source.directory.reset();
  } else if (key == "directory") {
    c.source.directory = fs::path(text());
    c.source.a_over_h.reset();
  } else if (key == "dt_over_tc") {
    c.dt_over_tc = number();
  } else if (key == "target_ratio_K") {
    c.target_ratio_K = number();
  } else if (key == "target_ratio_A") {
    c.target_ratio_A = number();
  } else if (key == "theta") {
    c.theta = number();
  } else if (key == "variant") {
    c.variant = parse_variant(text());
  } else if (key == "policy") {
    c.policy = parse_inner_policy(text());
  } else if (key == "rho_K") {
    c.rho_K = count();
  } else if (key == "rho_A") {
    c.rho_A = count();
  } else if (key == "rho_S") {
    c.rho_S = count();
  } else if (key == "n_in") {
    c.n_in = count();
  } else if (key == "projected_A_solve") {
    std::string s = text();
    if (s == "tilde_diagonal") c.projected_A_solve = ProjectedASolve::tilde_diagonal;
    else if (s == "block_policy") c.projected_A_solve = ProjectedASolve::block_policy;
    else throw InputError("unknown projected_A_solve '" + s + "'");
  } else if (key == "tol") {
    c.tol = number();
  } else if (key == "max_it") {
    c.max_it = count();
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(count());
  } else {
    throw InputError("unknown case field '" + key + "'");
  }
}

struct Draft {
  BenchCase c;
  bool has_tol = false;
};

void apply_object(Draft& d, const json& obj) {
  if (!obj.is_object()) throw InputError("case entries must be objects");
  for (const auto& [key, v] : obj.items()) {
    if (key == "tol") {
      if (v.is_null() || (v.is_string() && v.get<std::string>().empty()))
        throw InputError("tol is empty");
      d.has_tol = true;
    }
    apply_field(d.c, key, v);
  }
}

BenchCase finish(const Draft& d) {
  if (!d.has_tol) throw InputError("case is missing the residual tolerance 'tol'");
  d.c.validate();
  return d.c;
}

}  // namespace

std::vector<BenchCase> parse_sweep_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("sweep config: ") + e.what());
  }
  if (!root.is_object()) throw InputError("sweep config must be an object");
  for (const auto& [key, v] : root.items())
    if (key != "defaults" && key != "grid" && key != "cases") throw InputError("unknown section '" + key + "'");

  Draft base;
  if (root.contains("defaults")) apply_object(base, root["defaults"]);

  std::vector<BenchCase> out;
  if (root.contains("grid")) {
    const json& grid = root["grid"];
    if (!grid.is_object()) throw InputError("grid must be an object of arrays");
    std::vector<Draft> drafts{base};
    for (const auto& [key, values] : grid.items()) {
      if (!values.is_array() || values.empty()) throw InputError("grid field '" + key + "' must be a non-empty array");
      std::vector<Draft> next;
      for (const Draft& d : drafts)
        for (const json& v : values) {
          Draft e = d;
          apply_object(e, json{{key, v}});
          next.push_back(std::move(e));
        }
      drafts = std::move(next);
    }
    for (const Draft& d : drafts) out.push_back(finish(d));
  }
  if (root.contains("cases")) {
    if (!root["cases"].is_array()) throw InputError("cases must be an array");
    for (const json& obj : root["cases"]) {
      Draft d = base;
      apply_object(d, obj);
      out.push_back(finish(d));
    }
  }
  if (out.empty()) throw InputError("sweep config defines no cases");
  return out;
}

std::vector<BenchCase> load_sweep_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

void write_summary_csv(const fs::path& path, const std::vector<CaseResult>& results) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "index,problem,dt_over_tc,alpha_over_alpha_K,alpha_over_alpha_A,variant,selected,policy,n_in,n_it,"
         "T_p,T_s,T_t,status,final_residual\n";
  out.precision(6);
  for (const CaseResult& r : results) {
    const BenchCase& c = r.bench_case;
    out << r.index << ',' << c.source.label() << ',' << r.dt_over_tc << ',' << r.ratio_K() << ',' << r.ratio_A()
        << ',' << to_string(c.variant) << ',' << r.selected << ',' << to_string(c.policy) << ',' << c.n_in << ','
        << r.report.iterations << ',' << r.setup_seconds << ',' << r.solve_seconds << ',' << r.total_seconds()
        << ',' << to_string(r.status) << ',' << r.report.final_relative_residual << '\n';
  }
}

void write_case_artifacts(const fs::path& dir, const std::vector<CaseResult>& results) {
  fs::create_directories(dir);
  for (const CaseResult& r : results) {
    const std::string id = std::to_string(r.index);
    if (!r.report.residual_history.empty())
      write_residual_history_csv(dir / ("history_" + id + ".csv"), r.report.residual_history);
    std::ofstream out(dir / ("setup_" + id + ".txt"));
    if (!out) throw InputError("cannot write setup report in " + dir.string());
    out << r.setup_report;
  }
}

}  // namespace erpf

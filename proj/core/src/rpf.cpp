#include "erpf/rpf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "erpf/errors.hpp"
#include "erpf/log.hpp"

namespace erpf {

namespace {

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <class F>
auto with_block(const char* block, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FactorizationError& e) {
    throw e.with_block(block);
  }
}

}  // namespace

std::string to_string(const InnerSolverSpec& spec) {
  switch (spec.kind) {
    case SolverKind::direct: return "direct";
    case SolverKind::ic: return "ic(" + std::to_string(spec.rho) + ")";
    case SolverKind::diagonal: return "diagonal";
  }
  return "unknown";
}

InnerSolverPtr make_inner_solver(const CsrMatrix& m, const InnerSolverSpec& spec) {
  switch (spec.kind) {
    case SolverKind::direct: return cholesky_factor(m);
    case SolverKind::ic: {
      IcOptions opts;
      opts.rcm = spec.rcm;
      return ic_factor(m, spec.rho, opts);
    }
    case SolverKind::diagonal: {
      const Vector d = diagonal_of(m);
      return diagonal_solver(d);
    }
  }
  throw InputError("unknown inner solver kind");
}

RpfConfig RpfConfig::direct_inner() { return {}; }

RpfConfig RpfConfig::incomplete_inner(Index rho_K, Index rho_A, Index rho_S) {
  RpfConfig cfg;
  cfg.solver_K = InnerSolverSpec::ic(rho_K);
  cfg.solver_A = InnerSolverSpec::ic(rho_A);
  cfg.solver_S = InnerSolverSpec::ic(rho_S);
  return cfg;
}

void RpfConfig::validate() const {
  if (!(omega_K > 1.0)) throw InputError("omega_K must exceed 1");
  if (!(omega_A > 1.0)) throw InputError("omega_A must exceed 1");
  for (const auto* s : {&solver_K, &solver_A, &solver_S}) {
    if (s->rho < 0) throw InputError("fill count must be non-negative");
  }
  if (alpha_override && !(*alpha_override > 0.0)) throw InputError("alpha override must be positive");
}

DiagonalSurrogateA compute_DA(const CsrMatrix& A, const CsrMatrix& B) {
  if (!A.square()) throw DimensionError("compute_DA: A must be square");
  if (B.rows() != A.rows()) throw DimensionError("compute_DA: B must have as many rows as A");
  DiagonalSurrogateA out;
  out.A_tilde.assign(uz(A.rows()), 0.0);
  const auto ao = A.row_offsets();
  const auto av = A.values();
  for (Index i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (Index q = ao[uz(i)]; q < ao[uz(i + 1)]; ++q) s += std::abs(av[uz(q)]);
    if (!(s > 0.0)) throw InputError("compute_DA: row " + std::to_string(i) + " of A is zero");
    out.A_tilde[uz(i)] = std::sqrt(s);
  }
  out.D_A.assign(uz(B.cols()), 0.0);
  const auto bo = B.row_offsets();
  const auto bc = B.col_indices();
  const auto bv = B.values();
  for (Index i = 0; i < B.rows(); ++i) {
    const double inv = 1.0 / out.A_tilde[uz(i)];
    for (Index q = bo[uz(i)]; q < bo[uz(i + 1)]; ++q) out.D_A[uz(bc[uz(q)])] += bv[uz(q)] * bv[uz(q)] * inv;
  }
  return out;
}

Vector compute_DK(const CsrMatrix& K, const CsrMatrix& Q) {
  if (!K.square()) throw DimensionError("compute_DK: K must be square");
  if (Q.rows() != K.rows()) throw DimensionError("compute_DK: Q must have as many rows as K");
  const Vector kd = diagonal_of(K);
  Vector dk(uz(Q.cols()), 0.0);
  const auto qo = Q.row_offsets();
  const auto qc = Q.col_indices();
  const auto qv = Q.values();
  for (Index i = 0; i < Q.rows(); ++i) {
    if (!(kd[uz(i)] > 0.0)) throw InputError("compute_DK: K has a non-positive diagonal at row " + std::to_string(i));
    const double inv = 1.0 / kd[uz(i)];
    for (Index q = qo[uz(i)]; q < qo[uz(i + 1)]; ++q) dk[uz(qc[uz(q)])] += qv[uz(q)] * qv[uz(q)] * inv;
  }
  return dk;
}

double compute_alpha(std::span<const double> D_K, std::span<const double> D_A, double gamma) {
  if (D_K.empty() || D_K.size() != D_A.size()) throw DimensionError("compute_alpha: need equal non-empty vectors");
  if (!(gamma > 0.0)) throw InputError("compute_alpha: gamma must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < D_K.size(); ++i) s += std::sqrt(D_K[i] * D_A[i]);
  return std::sqrt(gamma) * s / static_cast<double>(D_K.size());
}

AlphaBounds compute_alpha_bounds(std::span<const double> D_K, std::span<const double> D_A, double gamma,
                                 const RpfConfig& cfg) {
  if (D_K.empty() || D_A.empty()) throw DimensionError("compute_alpha_bounds: empty surrogate");
  if (!(gamma > 0.0)) throw InputError("compute_alpha_bounds: gamma must be positive");
  cfg.validate();
  const double max_k = *std::max_element(D_K.begin(), D_K.end());
  const double max_a = *std::max_element(D_A.begin(), D_A.end());
  return {max_k / (cfg.omega_K - 1.0), gamma * max_a / (cfg.omega_A - 1.0)};
}

RpfParameters estimate_parameters(const ThreeFieldSystem& sys, const RpfConfig& cfg) {
  cfg.validate();
  RpfParameters p;
  p.gamma = sys.gamma();
  p.omega_K = cfg.omega_K;
  p.omega_A = cfg.omega_A;
  p.D_K = compute_DK(sys.K(), sys.Q());
  auto da = compute_DA(sys.A(), sys.B());
  p.D_A = std::move(da.D_A);
  p.A_tilde = std::move(da.A_tilde);
  p.alpha = cfg.alpha_override ? *cfg.alpha_override : compute_alpha(p.D_K, p.D_A, p.gamma);
  const AlphaBounds b = compute_alpha_bounds(p.D_K, p.D_A, p.gamma, cfg);
  p.alpha_K = b.alpha_K;
  p.alpha_A = b.alpha_A;
  p.p_norm_inf = sys.P().norm_inf();
  return p;
}

double gamma_for_ratio_K(const RpfParameters& params, double ratio) {
  const double c = compute_alpha(params.D_K, params.D_A, 1.0);
  const double s = ratio * params.alpha_K / c;
  return s * s;
}

double gamma_for_ratio_A(const RpfParameters& params, double ratio) {
  const double c = compute_alpha(params.D_K, params.D_A, 1.0);
  const double max_a = *std::max_element(params.D_A.begin(), params.D_A.end());
  const double s = c * (params.omega_A - 1.0) / (ratio * max_a);
  return s * s;
}

RpfOperator rpf_setup(const ThreeFieldSystem& sys, const RpfConfig& cfg, RpfBuildMask mask) {
  return rpf_setup(sys, cfg, estimate_parameters(sys, cfg), mask);
}

RpfOperator rpf_setup(const ThreeFieldSystem& sys, const RpfConfig& cfg, RpfParameters params,
                      RpfBuildMask mask) {
  cfg.validate();
  RpfOperator op;
  op.params = std::move(params);
  op.Q = sys.Q();
  op.B = sys.B();
  const auto& p = op.params;
  if (!(p.alpha > 0.0)) throw InputError("relaxation parameter must be positive");
  if (p.p_norm_inf > 0.0 && p.alpha <= p.p_norm_inf) {
    op.warnings.push_back("alpha = " + fmt_real(p.alpha) + " does not exceed ||P||_inf = " + fmt_real(p.p_norm_inf));
    warn(op.warnings.back());
  }
  if (mask.K_hat) {
    op.K_hat = add_scaled(sys.K(), 1.0 / p.alpha_used_K(), spgemm(sys.Q(), sys.Q().transpose()));
    op.solver_K = with_block("K_hat", [&] { return make_inner_solver(op.K_hat, cfg.solver_K); });
  }
  if (mask.A_hat) {
    op.A_hat = add_scaled(sys.A(), p.gamma / p.alpha_used_A(), spgemm(sys.B(), sys.B().transpose()));
    op.solver_A = with_block("A_hat", [&] { return make_inner_solver(op.A_hat, cfg.solver_A); });
  }
  return op;
}

BlockVector rpf_apply_with(const CsrMatrix& Q, const CsrMatrix& B, double alpha, double gamma,
                           const BlockSolve& solve_K, const BlockSolve& solve_A, const BlockVector& r) {
  if (static_cast<Index>(r.u.size()) != Q.rows() || static_cast<Index>(r.q.size()) != B.rows() ||
      static_cast<Index>(r.p.size()) != Q.cols()) {
    throw DimensionError("rpf_apply: block vector does not conform");
  }
  BlockVector t = BlockVector::zeros(Q.rows(), B.rows(), Q.cols());
  // K-side: t_u = K_hat^{-1}(r_u + Q r_p / alpha), y_p = r_p - Q^T t_u
  Vector x_u = r.u;
  Q.multiply_add(1.0 / alpha, r.p, x_u);
  solve_K(x_u, t.u);
  Vector y_p(r.p.size());
  Q.multiply_transpose(t.u, y_p);
  for (std::size_t i = 0; i < y_p.size(); ++i) y_p[i] = r.p[i] - y_p[i];
  // A-side: t_q = A_hat^{-1}(r_q + B y_p / alpha), t_p = (y_p - gamma B^T t_q) / alpha
  Vector z_q = r.q;
  B.multiply_add(1.0 / alpha, y_p, z_q);
  solve_A(z_q, t.q);
  B.multiply_transpose(t.q, t.p);
  for (std::size_t i = 0; i < y_p.size(); ++i) t.p[i] = (y_p[i] - gamma * t.p[i]) / alpha;
  return t;
}

BlockVector rpf_apply(const RpfOperator& op, const BlockVector& r) {
  if (!op.solver_K || !op.solver_A) throw InputError("rpf_apply: augmented block solvers were not built");
  const BlockSolve sk = [&](std::span<const double> b, std::span<double> x) { op.solver_K->apply(b, x); };
  const BlockSolve sa = [&](std::span<const double> b, std::span<double> x) { op.solver_A->apply(b, x); };
  return rpf_apply_with(op.Q, op.B, op.alpha(), op.gamma(), sk, sa, r);
}

std::string setup_summary(const RpfParameters& p) {
  std::string s;
  const auto line = [&](const char* key, double v) { s += std::string(key) + " = " + fmt_real(v) + "\n"; };
  line("gamma", p.gamma);
  line("alpha", p.alpha);
  line("alpha_K", p.alpha_K);
  line("alpha_A", p.alpha_A);
  line("alpha_over_alpha_K", p.ratio_K());
  line("alpha_over_alpha_A", p.ratio_A());
  line("alpha_used_K", p.alpha_used_K());
  line("alpha_used_A", p.alpha_used_A());
  line("omega_K", p.omega_K);
  line("omega_A", p.omega_A);
  line("p_norm_inf", p.p_norm_inf);
  return s;
}

void write_setup_summary(const std::filesystem::path& path, const std::string& summary) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << summary;
}

}  // namespace erpf

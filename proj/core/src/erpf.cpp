#include "erpf/erpf.hpp"

#include <string>

#include "erpf/errors.hpp"
#include "erpf/log.hpp"

namespace erpf {

namespace {

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

void require(const InnerSolverPtr& s, const char* what) {
  if (!s) throw InputError(std::string("missing inner solver: ") + what);
}

template <class F>
auto with_block(const char* block, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FactorizationError& e) {
    throw e.with_block(block);
  }
}

SelectedVariant classify(double alpha, double alpha_K, double alpha_A) {
  if (alpha < alpha_A) return SelectedVariant::erpf2_A_side;
  if (alpha < alpha_K) return SelectedVariant::erpf1_K_side;
  return SelectedVariant::rpf;
}

}  // namespace

void AugmentedBlockContext::multiply_Chat(std::span<const double> x, std::span<double> y) const {
  C->multiply(x, y);
  if (beta == 0.0) return;
  Vector ftx(uz(F->cols()));
  F->multiply_transpose(x, ftx);
  F->multiply_add(beta, ftx, y);
}

CsrMatrix augmented_matrix(const CsrMatrix& C, const CsrMatrix& F, double beta) {
  if (F.rows() != C.rows()) throw DimensionError("augmented_matrix: F must have as many rows as C");
  return add_scaled(C, beta, spgemm(F, F.transpose()));
}

Vector method1_apply(const AugmentedBlockContext& ctx, std::span<const double> b) {
  require(ctx.solver_Chat_ell, "C_hat_ell");
  if (ctx.n_in < 1) throw InputError("method1_apply: n_in must be at least 1");
  if (static_cast<Index>(b.size()) != ctx.dim()) throw DimensionError("method1_apply: length mismatch");
  const double step = ctx.beta_ell / ctx.beta;
  Vector w(b.size(), 0.0);
  Vector r(b.begin(), b.end());
  Vector v(b.size());
  for (Index k = 0; k < ctx.n_in; ++k) {
    if (k > 0) {
      ctx.multiply_Chat(w, v);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - v[i];
    }
    ctx.solver_Chat_ell->apply(r, v);
    axpy(step, v, w);
  }
  return w;
}

Vector method2_apply(const AugmentedBlockContext& ctx, std::span<const double> b) {
  require(ctx.solver_C, "C");
  require(ctx.solver_Stilde, "Schur surrogate");
  if (static_cast<Index>(b.size()) != ctx.dim()) throw DimensionError("method2_apply: length mismatch");
  Vector c = ctx.solver_C->apply(b);
  Vector d(uz(ctx.F->cols()));
  ctx.F->multiply_transpose(c, d);
  const Vector g = ctx.solver_Stilde->apply(d);
  std::copy(b.begin(), b.end(), c.begin());
  ctx.F->multiply_add(-ctx.beta, g, c);
  return ctx.solver_C->apply(c);
}

InnerSolverPtr build_stilde_K(std::span<const double> D_K, double alpha) {
  if (!(alpha > 0.0)) throw InputError("build_stilde_K: alpha must be positive");
  Vector d(D_K.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 + D_K[i] / alpha;
  return diagonal_solver(d);
}

CsrMatrix assemble_stilde_A(const CsrMatrix& B, std::span<const double> A_tilde, double gamma, double alpha) {
  if (static_cast<Index>(A_tilde.size()) != B.rows()) throw DimensionError("assemble_stilde_A: A_tilde length");
  if (!(gamma > 0.0) || !(alpha > 0.0)) throw InputError("assemble_stilde_A: gamma and alpha must be positive");
  Vector s(A_tilde.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = gamma / (alpha * A_tilde[i]);
  const CsrMatrix bt = B.transpose();
  const CsrMatrix prod = spgemm(bt, B.scale_rows(s));
  return add_scaled(CsrMatrix::identity(B.cols()), 1.0, prod);
}

InnerSolverPtr build_stilde_A(const CsrMatrix& B, std::span<const double> A_tilde, double gamma, double alpha,
                              const InnerSolverSpec& spec) {
  const CsrMatrix s = assemble_stilde_A(B, A_tilde, gamma, alpha);
  return with_block("S_tilde_A", [&] { return make_inner_solver(s, spec); });
}

BlockVector erpf2_alt_apply(const RpfOperator& op, const AugmentedBlockContext* ctx_K,
                            const AugmentedBlockContext* ctx_A, const BlockVector& r) {
  const CsrMatrix& Q = op.Q;
  const CsrMatrix& B = op.B;
  const double alpha = op.alpha();
  const double gamma = op.gamma();
  if (static_cast<Index>(r.u.size()) != op.nu() || static_cast<Index>(r.q.size()) != op.nq() ||
      static_cast<Index>(r.p.size()) != op.np()) {
    throw DimensionError("erpf2_alt_apply: block vector does not conform");
  }
  BlockVector t = BlockVector::zeros(op.nu(), op.nq(), op.np());
  Vector y_p(r.p.size());

  if (ctx_K && alpha < op.params.alpha_K) {
    require(ctx_K->solver_C, "K");
    require(ctx_K->solver_Stilde, "S_tilde_K");
    Vector x_u = ctx_K->solver_C->apply(r.u);
    Vector x_p(r.p.size());
    Q.multiply_transpose(x_u, x_p);
    for (std::size_t i = 0; i < x_p.size(); ++i) x_p[i] = r.p[i] - x_p[i];
    ctx_K->solver_Stilde->apply(x_p, y_p);
    x_u = r.u;
    Q.multiply_add(1.0 / alpha, y_p, x_u);
    ctx_K->solver_C->apply(x_u, t.u);
  } else {
    require(op.solver_K, "K_hat");
    Vector x_u = r.u;
    Q.multiply_add(1.0 / alpha, r.p, x_u);
    op.solver_K->apply(x_u, t.u);
    Q.multiply_transpose(t.u, y_p);
    for (std::size_t i = 0; i < y_p.size(); ++i) y_p[i] = r.p[i] - y_p[i];
  }

  if (ctx_A && alpha < op.params.alpha_A) {
    require(ctx_A->solver_C, "A");
    require(ctx_A->solver_Stilde, "S_tilde_A");
    Vector z_q = ctx_A->solver_C->apply(r.q);
    Vector w(r.p.size());
    B.multiply_transpose(z_q, w);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (y_p[i] - gamma * w[i]) / alpha;
    ctx_A->solver_Stilde->apply(w, t.p);
    z_q = r.q;
    B.multiply_add(1.0, t.p, z_q);
    ctx_A->solver_C->apply(z_q, t.q);
  } else {
    require(op.solver_A, "A_hat");
    Vector z_q = r.q;
    B.multiply_add(1.0 / alpha, y_p, z_q);
    op.solver_A->apply(z_q, t.q);
    B.multiply_transpose(t.q, t.p);
    for (std::size_t i = 0; i < y_p.size(); ++i) t.p[i] = (y_p[i] - gamma * t.p[i]) / alpha;
  }
  return t;
}

std::string_view to_string(SelectedVariant v) noexcept {
  switch (v) {
    case SelectedVariant::erpf1_K_side: return "erpf1-K-side";
    case SelectedVariant::rpf: return "rpf";
    case SelectedVariant::erpf2_A_side: return "erpf2-A-side";
  }
  return "unknown";
}

SelectedVariant select_variant(double alpha, double alpha_K, double alpha_A) {
  if (alpha < alpha_K && alpha < alpha_A) {
    warn("alpha is below both alpha_K and alpha_A; selecting the A-side projected variant");
  }
  return classify(alpha, alpha_K, alpha_A);
}

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::rpf: return "rpf";
    case Variant::erpf1: return "erpf1";
    case Variant::erpf2: return "erpf2";
    case Variant::erpf2_alt: return "erpf2-alt";
    case Variant::automatic: return "auto";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::rpf, Variant::erpf1, Variant::erpf2, Variant::erpf2_alt, Variant::automatic}) {
    if (to_string(v) == name) return v;
  }
  throw InputError("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(SideMethod m) noexcept {
  switch (m) {
    case SideMethod::augmented: return "augmented";
    case SideMethod::stationary: return "stationary";
    case SideMethod::projected: return "projected";
  }
  return "unknown";
}

Preconditioner::Preconditioner(const ThreeFieldSystem& sys, const PreconditionerConfig& cfg)
    : variant_(cfg.variant) {
  RpfParameters params = estimate_parameters(sys, cfg.rpf);
  const double alpha = params.alpha;
  const bool below_K = alpha < params.alpha_K;
  const bool below_A = alpha < params.alpha_A;
  selected_ = cfg.variant == Variant::automatic ? select_variant(alpha, params.alpha_K, params.alpha_A)
                                                : classify(alpha, params.alpha_K, params.alpha_A);
  switch (cfg.variant) {
    case Variant::rpf:
      break;
    case Variant::erpf1:
      if (below_K) k_method_ = SideMethod::stationary;
      if (below_A) a_method_ = SideMethod::stationary;
      break;
    case Variant::erpf2:
    case Variant::erpf2_alt:
      if (below_K) k_method_ = SideMethod::projected;
      if (below_A) a_method_ = SideMethod::projected;
      break;
    case Variant::automatic:
      if (below_K) k_method_ = SideMethod::stationary;
      if (below_A) a_method_ = SideMethod::projected;
      break;
  }

  const RpfBuildMask mask{k_method_ != SideMethod::projected, a_method_ != SideMethod::projected};
  op_ = rpf_setup(sys, cfg.rpf, std::move(params), mask);
  const RpfParameters& p = op_.params;

  if (k_method_ != SideMethod::augmented) {
    AugmentedBlockContext ctx;
    ctx.C = std::make_shared<const CsrMatrix>(sys.K());
    ctx.F = std::make_shared<const CsrMatrix>(sys.Q());
    ctx.beta = 1.0 / p.alpha;
    ctx.beta_ell = 1.0 / p.alpha_K;
    ctx.n_in = cfg.n_in;
    if (k_method_ == SideMethod::stationary) {
      ctx.solver_Chat_ell = op_.solver_K;
    } else {
      ctx.solver_C = with_block("K", [&] { return make_inner_solver(sys.K(), cfg.rpf.solver_K); });
      ctx.solver_Stilde = build_stilde_K(p.D_K, p.alpha);
    }
    ctx_K_ = std::move(ctx);
  }
  if (a_method_ != SideMethod::augmented) {
    AugmentedBlockContext ctx;
    ctx.C = std::make_shared<const CsrMatrix>(sys.A());
    ctx.F = std::make_shared<const CsrMatrix>(sys.B());
    ctx.beta = p.gamma / p.alpha;
    ctx.beta_ell = p.gamma / p.alpha_A;
    ctx.n_in = cfg.n_in;
    if (a_method_ == SideMethod::stationary) {
      ctx.solver_Chat_ell = op_.solver_A;
    } else {
      if (cfg.projected_A_solve == ProjectedASolve::tilde_diagonal) {
        ctx.solver_C = diagonal_solver(p.A_tilde);
      } else {
        ctx.solver_C = with_block("A", [&] { return make_inner_solver(sys.A(), cfg.rpf.solver_A); });
      }
      ctx.solver_Stilde = build_stilde_A(sys.B(), p.A_tilde, p.gamma, p.alpha, cfg.rpf.solver_S);
    }
    ctx_A_ = std::move(ctx);
  }
}

BlockVector Preconditioner::apply(const BlockVector& r) const {
  if (variant_ == Variant::erpf2_alt) {
    return erpf2_alt_apply(op_, ctx_K_ ? &*ctx_K_ : nullptr, ctx_A_ ? &*ctx_A_ : nullptr, r);
  }
  const auto side = [](SideMethod m, const InnerSolverPtr& plain, const std::optional<AugmentedBlockContext>& ctx) {
    return BlockSolve([m, &plain, &ctx](std::span<const double> b, std::span<double> x) {
      switch (m) {
        case SideMethod::augmented: plain->apply(b, x); return;
        case SideMethod::stationary: {
          const Vector w = method1_apply(*ctx, b);
          std::copy(w.begin(), w.end(), x.begin());
          return;
        }
        case SideMethod::projected: {
          const Vector w = method2_apply(*ctx, b);
          std::copy(w.begin(), w.end(), x.begin());
          return;
        }
      }
    });
  };
  return rpf_apply_with(op_.Q, op_.B, op_.alpha(), op_.gamma(), side(k_method_, op_.solver_K, ctx_K_),
                        side(a_method_, op_.solver_A, ctx_A_), r);
}

LinearOperator Preconditioner::as_operator() const {
  return [this](std::span<const double> x, std::span<double> y) {
    const BlockVector r = BlockVector::from_flat(x, op_.nu(), op_.nq(), op_.np());
    const BlockVector t = apply(r);
    std::copy(t.u.begin(), t.u.end(), y.begin());
    std::copy(t.q.begin(), t.q.end(), y.begin() + static_cast<std::ptrdiff_t>(t.u.size()));
    std::copy(t.p.begin(), t.p.end(), y.begin() + static_cast<std::ptrdiff_t>(t.u.size() + t.q.size()));
  };
}

}  // namespace erpf

#include "erpf/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "erpf/errors.hpp"

namespace erpf {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

void check_dim(Index n, const char* who) {
  if (n > kDenseEigenLimit) {
    throw BudgetError(std::string(who) + ": dimension " + std::to_string(n) + " exceeds the dense limit " +
                      std::to_string(kDenseEigenLimit));
  }
}

Mat to_eigen(const DenseMatrix& d) {
  Mat m(d.rows(), d.cols());
  for (Index i = 0; i < d.rows(); ++i)
    for (Index j = 0; j < d.cols(); ++j) m(i, j) = d(i, j);
  return m;
}

Mat to_eigen(const CsrMatrix& s) {
  Mat m = Mat::Zero(s.rows(), s.cols());
  const auto o = s.row_offsets();
  const auto c = s.col_indices();
  const auto v = s.values();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index q = o[uz(i)]; q < o[uz(i + 1)]; ++q) m(i, c[uz(q)]) += v[uz(q)];
  return m;
}

DenseMatrix from_eigen(const Mat& m) {
  DenseMatrix d(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) d(i, j) = m(i, j);
  return d;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

std::vector<double> generalized_eigs(const DenseMatrix& Ml, const DenseMatrix& Mr) {
  if (Ml.rows() != Ml.cols() || Mr.rows() != Mr.cols() || Ml.rows() != Mr.rows()) {
    throw DimensionError("generalized_eigs: need square matrices of equal size");
  }
  check_dim(Ml.rows(), "generalized_eigs");
  const Mat a = symmetrize(to_eigen(Ml));
  const Mat b = symmetrize(to_eigen(Mr));
  Eigen::LLT<Mat> llt(b);
  if (llt.info() != Eigen::Success) throw InputError("generalized_eigs: right matrix is not positive definite");
  // L^{-1} A L^{-T}
  Mat w = llt.matrixL().solve(a);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(w), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("generalized_eigs: eigensolver did not converge");
  return to_std(es.eigenvalues());
}

std::vector<double> symmetric_eigs(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("symmetric_eigs: matrix must be square");
  check_dim(m.rows(), "symmetric_eigs");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(to_eigen(m)), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("symmetric_eigs: eigensolver did not converge");
  return to_std(es.eigenvalues());
}

DenseMatrix schur_dense(const CsrMatrix& C, const CsrMatrix& F) {
  if (F.rows() != C.rows()) throw DimensionError("schur_dense: F must have as many rows as C");
  check_dim(F.cols(), "schur_dense");
  const CholeskySolver chol(C);
  const Index n = C.rows();
  const Index k = F.cols();
  const CsrMatrix ft = F.transpose();
  DenseMatrix s(k, k);
  Vector col(uz(n)), x(uz(n)), y(uz(k));
  for (Index j = 0; j < k; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    const auto o = ft.row_offsets();
    for (Index q = o[uz(j)]; q < o[uz(j + 1)]; ++q) col[uz(ft.col_indices()[uz(q)])] = ft.values()[uz(q)];
    chol.apply(col, x);
    F.multiply_transpose(x, y);
    for (Index i = 0; i < k; ++i) s(i, j) = y[uz(i)];
  }
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < i; ++j) s(i, j) = s(j, i) = 0.5 * (s(i, j) + s(j, i));
  return s;
}

EigenReport augmented_spectrum_bound(const CsrMatrix& C, const CsrMatrix& F, double beta, double beta_ell) {
  if (!(beta >= beta_ell) || !(beta_ell > 0.0)) throw InputError("augmented_spectrum_bound: need beta >= beta_ell > 0");
  check_dim(C.rows(), "augmented_spectrum_bound");
  EigenReport rep;
  const std::vector<double> sc = symmetric_eigs(schur_dense(C, F));
  rep.mu1 = sc.empty() ? 0.0 : sc.back();
  rep.bound_lambda1 = (beta * rep.mu1 + 1.0) / (beta_ell * rep.mu1 + 1.0);
  const Mat c = to_eigen(C);
  const Mat f = to_eigen(F);
  const Mat fft = f * f.transpose();
  rep.eigenvalues = generalized_eigs(from_eigen(c + beta * fft), from_eigen(c + beta_ell * fft));
  for (double l : rep.eigenvalues) {
    rep.max_violation = std::max({rep.max_violation, 1.0 - l, l - rep.bound_lambda1});
  }
  return rep;
}

double iteration_matrix_radius(const AugmentedBlockContext& ctx, double rel_tol, Index max_it) {
  if (!ctx.C || !ctx.F) throw InputError("iteration_matrix_radius: context has no matrices");
  check_dim(ctx.dim(), "iteration_matrix_radius");
  const Mat c = to_eigen(*ctx.C);
  const Mat f = to_eigen(*ctx.F);
  const Mat fft = f * f.transpose();
  const Mat chat = c + ctx.beta * fft;
  const Mat chat_ell = c + ctx.beta_ell * fft;
  Eigen::LLT<Mat> llt(chat_ell);
  if (llt.info() != Eigen::Success) throw InputError("iteration_matrix_radius: C_hat_ell is not SPD");
  const double r = ctx.beta_ell / ctx.beta;

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  Vec x(ctx.dim());
  for (Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
  // G is self-adjoint in the C_hat_ell inner product, so the Rayleigh quotient
  // in that product converges to the dominant eigenvalue.
  double prev = 0.0;
  for (Index it = 0; it < max_it; ++it) {
    const Vec y = chat_ell * x;
    const double xnorm = std::sqrt(x.dot(y));
    if (xnorm == 0.0) return 0.0;
    x /= xnorm;
    const double num = x.dot(chat_ell * x) - r * x.dot(chat * x);
    const double est = std::abs(num);
    if (it > 0 && std::abs(est - prev) <= rel_tol * std::max(est, 1e-300)) return est;
    if (est < 1e-300) return 0.0;
    prev = est;
    x = x - r * llt.solve(chat * x);
  }
  return prev;
}

std::vector<double> singular_values(const CsrMatrix& m) {
  const Index k = std::min(m.rows(), m.cols());
  check_dim(k, "singular_values");
  const Mat a = to_eigen(m);
  const Mat g = m.rows() >= m.cols() ? Mat(a.transpose() * a) : Mat(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  std::vector<double> s(uz(k));
  for (Index i = 0; i < k; ++i) s[uz(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(k - 1 - i)));
  return s;
}

TraceModel TraceModel::exact(const ThreeFieldSystem& sys) {
  TraceModel tm;
  tm.np_ = sys.np();
  tm.gamma_ = sys.gamma();
  tm.S_K_ = schur_dense(sys.K(), sys.Q());
  tm.S_A_ = schur_dense(sys.A(), sys.B());
  tm.P_ = diagonal_of(sys.P());
  return tm;
}

TraceModel TraceModel::diagonal(std::span<const double> D_K, std::span<const double> D_A,
                                std::span<const double> p_diag, double gamma) {
  if (D_K.size() != D_A.size() || D_K.size() != p_diag.size()) {
    throw DimensionError("TraceModel::diagonal: length mismatch");
  }
  TraceModel tm;
  tm.np_ = static_cast<Index>(D_K.size());
  tm.gamma_ = gamma;
  tm.diagonal_ = true;
  tm.S_K_ = DenseMatrix(1, tm.np_);
  tm.S_A_ = DenseMatrix(1, tm.np_);
  for (Index i = 0; i < tm.np_; ++i) {
    tm.S_K_(0, i) = D_K[uz(i)];
    tm.S_A_(0, i) = D_A[uz(i)];
  }
  tm.P_.assign(p_diag.begin(), p_diag.end());
  return tm;
}

DenseMatrix TraceModel::S_full() const {
  DenseMatrix s(np_, np_);
  for (Index i = 0; i < np_; ++i) {
    if (diagonal_) {
      s(i, i) = P_[uz(i)] + S_K_(0, i) + gamma_ * S_A_(0, i);
    } else {
      for (Index j = 0; j < np_; ++j) s(i, j) = S_K_(i, j) + gamma_ * S_A_(i, j);
      s(i, i) += P_[uz(i)];
    }
  }
  return s;
}

double TraceModel::objective(double alpha) const {
  if (!(alpha > 0.0)) throw InputError("trace objective: alpha must be positive");
  if (diagonal_) {
    double tr = 0.0;
    for (Index i = 0; i < np_; ++i) {
      const double dk = S_K_(0, i);
      const double da = gamma_ * S_A_(0, i);
      tr += alpha * (P_[uz(i)] + dk + da) / ((alpha + dk) * (alpha + da));
    }
    return static_cast<double>(np_) - tr;
  }
  check_dim(np_, "trace objective");
  const Mat sk = to_eigen(S_K_);
  const Mat sa = to_eigen(S_A_);
  const Mat s = to_eigen(S_full());
  const Mat id = Mat::Identity(np_, np_);
  // X = (alpha I + S_K)^{-1} S; tr[X (alpha I + gamma S_A)^{-1}] = tr[(alpha I + gamma S_A)^{-1} X]
  const Mat x = Eigen::LLT<Mat>(alpha * id + sk).solve(s);
  const Mat y = Eigen::LLT<Mat>(alpha * id + gamma_ * sa).solve(x.transpose());
  return static_cast<double>(np_) - alpha * y.trace();
}

std::vector<double> trace_objective_scan(const TraceModel& tm, std::span<const double> alpha_grid) {
  std::vector<double> out;
  out.reserve(alpha_grid.size());
  for (double a : alpha_grid) out.push_back(tm.objective(a));
  return out;
}

std::vector<double> log_grid(double lo, double hi, Index n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw InputError("log_grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> g(uz(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (Index i = 0; i < n; ++i) g[uz(i)] = n == 1 ? lo : std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

struct DenseCholeskySolver::Impl {
  Eigen::LLT<Mat> llt;
};

DenseCholeskySolver::DenseCholeskySolver(const DenseMatrix& m) : n_(m.rows()), impl_(std::make_unique<Impl>()) {
  if (m.rows() != m.cols()) throw DimensionError("DenseCholeskySolver: matrix must be square");
  impl_->llt.compute(symmetrize(to_eigen(m)));
  if (impl_->llt.info() != Eigen::Success) throw FactorizationError("matrix not SPD", -1);
}

DenseCholeskySolver::~DenseCholeskySolver() = default;

void DenseCholeskySolver::apply(std::span<const double> b, std::span<double> x) const {
  if (static_cast<Index>(b.size()) != n_ || static_cast<Index>(x.size()) != n_) {
    throw DimensionError("dense solve: length mismatch");
  }
  const Vec sol = impl_->llt.solve(Eigen::Map<const Vec>(b.data(), n_));
  std::copy(sol.data(), sol.data() + n_, x.begin());
}

DenseMatrix exact_stilde(const CsrMatrix& C, const CsrMatrix& F, double beta) {
  DenseMatrix s = schur_dense(C, F);
  for (double& v : s.values()) v *= beta;
  for (Index i = 0; i < s.rows(); ++i) s(i, i) += 1.0;
  return s;
}

void write_values_csv(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "index,value\n";
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, values[i]);
    out << buf;
  }
}

void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> eigenvalues) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "index,real,imag\n";
  char buf[64];
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,0\n", i, eigenvalues[i]);
    out << buf;
  }
}

}  // namespace erpf

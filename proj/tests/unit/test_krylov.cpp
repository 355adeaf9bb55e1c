#include <gtest/gtest.h>

#include "erpf/errors.hpp"
#include "erpf/factorization.hpp"
#include "erpf/krylov.hpp"
#include "erpf/log.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

#include <fstream>

namespace erpf {
namespace {

using testing::Gen;

/// Non-symmetric, diagonally dominant.
CsrMatrix nonsymmetric(Gen& g, Index n) {
  CsrMatrix s = g.sparse(n, n, 0.1);
  Vector rowsum(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i)
    for (Index k = s.row_offsets()[i]; k < s.row_offsets()[i + 1]; ++k) rowsum[i] += std::abs(s.values()[k]);
  for (double& x : rowsum) x += 1.0;
  return add_scaled(s, 1.0, CsrMatrix::diagonal(rowsum));
}

double true_residual(const CsrMatrix& m, std::span<const double> x, std::span<const double> b) {
  Vector r = spmv(m, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r) / norm2(b);
}

TEST(Bicgstab, ExactInversePreconditionerConvergesImmediately) {
  Gen g(51);
  for (int trial = 0; trial < 10; ++trial) {
    CsrMatrix m = nonsymmetric(g, g.integer(2, 100));
    testing::Mat inv = testing::dense(m).inverse();
    LinearOperator prec = [&](std::span<const double> x, std::span<double> y) {
      testing::Vec r = inv * testing::vec(x);
      std::copy(r.data(), r.data() + r.size(), y.begin());
    };
    Vector b = g.vector(m.rows());
    auto [x, rep] = bicgstab(as_operator(m), prec, b, {1e-10, 100});
    EXPECT_EQ(rep.status, SolveStatus::converged);
    EXPECT_LE(rep.iterations, 2);
    EXPECT_LE(true_residual(m, x, b), 1e-10);
  }
}

TEST(Bicgstab, ReportedResidualMatchesRecomputation) {
  Gen g(52);
  for (int trial = 0; trial < 10; ++trial) {
    CsrMatrix m = nonsymmetric(g, 80);
    Vector b = g.vector(80);
    auto [x, rep] = bicgstab(as_operator(m), identity_operator(), b, {1e-8, 500});
    ASSERT_EQ(rep.status, SolveStatus::converged);
    EXPECT_LE(std::abs(rep.final_relative_residual - true_residual(m, x, b)), 1e-12);
    EXPECT_EQ(rep.residual_history.front(), 1.0);
    EXPECT_EQ(static_cast<Index>(rep.residual_history.size()), rep.iterations + 1);
    EXPECT_LE(rep.residual_history.back(), 1e-8);
    EXPECT_GE(rep.total_time, rep.solve_time);
  }
}

TEST(Bicgstab, ZeroRightHandSide) {
  CsrMatrix m = CsrMatrix::identity(5);
  auto [x, rep] = bicgstab(as_operator(m), identity_operator(), Vector(5, 0.0));
  EXPECT_EQ(rep.status, SolveStatus::converged);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(x, Vector(5, 0.0));
}

TEST(Bicgstab, UnitToleranceNeedsOneIteration) {
  // The initial ratio 1 is not strictly below tol = 1, so one step is taken.
  Gen g(53);
  CsrMatrix m = nonsymmetric(g, 30);
  auto [x, rep] = bicgstab(as_operator(m), identity_operator(), g.vector(30), {1.0, 10});
  EXPECT_EQ(rep.status, SolveStatus::converged);
  EXPECT_EQ(rep.iterations, 1);
  auto [x2, rep2] = bicgstab(as_operator(m), identity_operator(), g.vector(30), {1.5, 10});
  EXPECT_EQ(rep2.iterations, 0);
}

TEST(Bicgstab, IterationCapIsReported) {
  Gen g(54);
  CsrMatrix m = nonsymmetric(g, 200);
  auto [x, rep] = bicgstab(as_operator(m), identity_operator(), g.vector(200), {1e-14, 2});
  EXPECT_EQ(rep.status, SolveStatus::max_iterations);
  EXPECT_EQ(rep.iterations, 2);
  EXPECT_EQ(to_string(rep.status), "max-iterations");
}

TEST(Bicgstab, BreakdownOnSingularOperator) {
  CsrMatrix zero = CsrMatrix::zeros(4, 4);
  auto [x, rep] = bicgstab(as_operator(zero), identity_operator(), Vector{1, 2, 3, 4}, {1e-8, 10});
  EXPECT_EQ(rep.status, SolveStatus::breakdown);
}

TEST(Bicgstab, RejectsBadOptions) {
  CsrMatrix m = CsrMatrix::identity(3);
  EXPECT_THROW(bicgstab(as_operator(m), identity_operator(), Vector(3, 1.0), {0.0, 10}), Error);
  EXPECT_THROW(bicgstab(as_operator(m), identity_operator(), Vector(3, 1.0), {1e-6, 0}), Error);
}

TEST(Bicgstab, HistoryCsvLayout) {
  testing::TempDir dir;
  write_residual_history_csv(dir / "h.csv", Vector{1.0, 0.5});
  std::ifstream in(dir / "h.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,relative_residual");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 2), "0,");
}

TEST(Log, SinkCanBeReplacedAndRestored) {
  std::vector<std::string> seen;
  WarningSink old = set_warning_sink([&](std::string_view m) { seen.emplace_back(m); });
  warn("hello");
  set_warning_sink(old);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0], "hello");
}

}  // namespace
}  // namespace erpf

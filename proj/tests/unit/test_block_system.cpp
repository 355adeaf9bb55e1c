#include <gtest/gtest.h>

#include "erpf/block_system.hpp"
#include "erpf/errors.hpp"
#include "support/oracles.hpp"

namespace erpf {
namespace {

using testing::Gen;
using testing::vec;

struct Blocks {
  CsrMatrix K, A, P, Q, B;
};

Blocks random_blocks(Gen& g, Index nu, Index nq, Index np) {
  Vector pd = g.vector(np);
  for (double& x : pd) x = std::abs(x);
  return {g.spd(nu, 0.2), g.spd(nq, 0.2), CsrMatrix::diagonal(pd), g.sparse(nu, np, 0.3), g.sparse(nq, np, 0.3)};
}

ThreeFieldSystem make(const Blocks& b, double theta = 1.0, double dt = 0.5) {
  return ThreeFieldSystem(b.K, b.A, b.P, b.Q, b.B, theta, dt);
}

TEST(BlockSystem, OperatorMatchesDenseAssembly) {
  Gen g(31);
  for (int trial = 0; trial < 10; ++trial) {
    Blocks b = random_blocks(g, g.integer(1, 20), g.integer(1, 20), g.integer(1, 10));
    ThreeFieldSystem s = make(b, g.uniform(0.5, 1.0), g.uniform(0.1, 10.0));
    Vector x = g.vector(s.size());
    BlockVector bx = BlockVector::from_flat(x, s.nu(), s.nq(), s.np());
    testing::Vec want = testing::dense_block(s) * vec(x);
    EXPECT_LE(testing::rel_err(vec(apply_block_operator(s, bx).flat()), want), 1e-13);
  }
}

TEST(BlockSystem, OperatorIsLinear) {
  Gen g(32);
  ThreeFieldSystem s = make(random_blocks(g, 15, 12, 6));
  for (int trial = 0; trial < 10; ++trial) {
    Vector x = g.vector(s.size()), y = g.vector(s.size());
    double a = g.uniform(), c = g.uniform();
    Vector comb(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) comb[i] = a * x[i] + c * y[i];
    auto act = [&](const Vector& v) {
      return apply_block_operator(s, BlockVector::from_flat(v, s.nu(), s.nq(), s.np())).flat();
    };
    Vector ax = act(x), ay = act(y), acomb = act(comb);
    Vector want(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) want[i] = a * ax[i] + c * ay[i];
    EXPECT_LE(testing::rel_err(acomb, want), 1e-12);
  }
}

TEST(BlockSystem, CouplingCancelsInBilinearFormWithoutFlowBlocks) {
  Gen g(33);
  Blocks b = random_blocks(g, 14, 9, 5);
  b.P = CsrMatrix::zeros(5, 5);
  b.B = CsrMatrix::zeros(9, 5);
  ThreeFieldSystem s = make(b);
  for (int trial = 0; trial < 10; ++trial) {
    BlockVector x{g.vector(14), Vector(9, 0.0), g.vector(5)};
    double form = dot(x.flat(), apply_block_operator(s, x).flat());
    double uKu = dot(x.u, spmv(b.K, x.u));
    EXPECT_LE(std::abs(form - uKu), 1e-12 * std::abs(uKu));
  }
}

TEST(BlockSystem, ResidualOfExactSolutionVanishes) {
  Gen g(34);
  ThreeFieldSystem s = make(random_blocks(g, 10, 8, 4));
  Vector x = g.vector(s.size());
  BlockVector bx = BlockVector::from_flat(x, s.nu(), s.nq(), s.np());
  BlockVector rhs = apply_block_operator(s, bx);
  auto [r, norm] = block_residual(s, bx, rhs);
  EXPECT_LE(norm, 1e-13 * rhs.norm());
  EXPECT_EQ(r.size(), s.size());
}

TEST(BlockSystem, ValidationNamesTheBlock) {
  Gen g(35);
  Blocks b = random_blocks(g, 6, 5, 3);
  auto expect_error = [](auto&& fn, const std::string& needle) {
    try {
      fn();
      FAIL() << "expected error mentioning " << needle;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error([&] { ThreeFieldSystem(b.K, b.A, b.P, g.sparse(6, 2, 0.5), b.B, 1.0, 1.0); }, "Q");
  expect_error([&] { ThreeFieldSystem(b.K, b.A, b.P, b.Q, g.sparse(4, 3, 0.5), 1.0, 1.0); }, "B");
  expect_error([&] { ThreeFieldSystem(g.sparse(6, 6, 0.5), b.A, b.P, b.Q, b.B, 1.0, 1.0); }, "K");
  expect_error([&] { ThreeFieldSystem(b.K, b.A, g.sparse(3, 3, 0.9), b.Q, b.B, 1.0, 1.0); }, "P");
  Vector neg{1.0, -1.0, 0.0};
  expect_error([&] { ThreeFieldSystem(b.K, b.A, CsrMatrix::diagonal(neg), b.Q, b.B, 1.0, 1.0); }, "P");
  EXPECT_THROW(ThreeFieldSystem(b.K, b.A, b.P, b.Q, b.B, 0.4, 1.0), InputError);
  EXPECT_THROW(ThreeFieldSystem(b.K, b.A, b.P, b.Q, b.B, 1.0, 0.0), InputError);
}

TEST(BlockSystem, TimeStepChangesOnlyGamma) {
  Gen g(36);
  ThreeFieldSystem s = make(random_blocks(g, 6, 5, 3), 1.0, 2.0);
  ThreeFieldSystem t = s.with_time_step(0.5, 8.0);
  EXPECT_DOUBLE_EQ(s.gamma(), 2.0);
  EXPECT_DOUBLE_EQ(t.gamma(), 4.0);
  EXPECT_EQ(t.K().nnz(), s.K().nnz());
  EXPECT_THROW(s.check_conforming(BlockVector::zeros(6, 5, 2)), DimensionError);
  EXPECT_THROW(BlockVector::from_flat(Vector(13), 6, 5, 3), DimensionError);
}

}  // namespace
}  // namespace erpf

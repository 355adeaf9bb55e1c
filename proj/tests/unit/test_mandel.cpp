#include <gtest/gtest.h>

#include "erpf/errors.hpp"
#include "erpf/mandel.hpp"
#include "support/oracles.hpp"

namespace erpf {
namespace {

using testing::dense;
using testing::Gen;
using testing::Mat;

TEST(MandelGrid, DimensionsForCoarseMeshes) {
  EXPECT_EQ(expected_dims(GridSpec::mandel(10)), (ThreeFieldDims{726, 420, 100}));
  EXPECT_EQ(expected_dims(GridSpec::mandel(20)), (ThreeFieldDims{3969, 2880, 800}));
  AssembledProblem pb = assemble_mandel(10, 1.0);
  EXPECT_EQ(pb.system.nu(), 726);
  EXPECT_EQ(pb.system.nq(), 420);
  EXPECT_EQ(pb.system.np(), 100);
  EXPECT_THROW(GridSpec::mandel(15), InputError);
  EXPECT_THROW(GridSpec::mandel(0), InputError);
}

TEST(MandelGrid, SingleElementDivergence) {
  GridSpec g{1, 1, 1, 2.0, 3.0, 5.0};
  EXPECT_EQ(expected_dims(g), (ThreeFieldDims{24, 6, 1}));
  MaterialParams mat;
  AssembledProblem pb = assemble_three_field(g, mat, 1.0, 1.0, MandelLoading{0.0, false});
  Mat B = dense(pb.system.B());
  ASSERT_EQ(B.rows(), 6);
  ASSERT_EQ(B.cols(), 1);
  // Faces x-low, x-high, y-low, y-high, z-low, z-high.
  const double area[3] = {3.0 * 5.0, 2.0 * 5.0, 2.0 * 3.0};
  for (int d = 0; d < 3; ++d) {
    EXPECT_DOUBLE_EQ(B(2 * d, 0), -area[d]);
    EXPECT_DOUBLE_EQ(B(2 * d + 1, 0), area[d]);
  }
  // A uniform flow through the two x faces has zero net divergence.
  testing::Vec q = testing::Vec::Zero(6);
  q(0) = q(1) = 1.0;
  EXPECT_DOUBLE_EQ((B.transpose() * q)(0), 0.0);
}

TEST(MandelGrid, ElementStiffnessHasRigidBodyKernel) {
  const double hx = 0.5, hy = 0.2, hz = 1.5;
  std::vector<double> ke = hex_stiffness(hx, hy, hz, 1.3, 0.7);
  ASSERT_EQ(ke.size(), 576u);
  Mat k(24, 24);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) k(i, j) = ke[static_cast<std::size_t>(24 * i + j)];
  EXPECT_LE((k - k.transpose()).norm(), 1e-14 * k.norm());
  // Three translations and three infinitesimal rotations.
  Mat rbm = Mat::Zero(24, 6);
  for (int a = 0; a < 8; ++a) {
    const double x = (a & 1) * hx, y = ((a >> 1) & 1) * hy, z = ((a >> 2) & 1) * hz;
    for (int c = 0; c < 3; ++c) rbm(3 * a + c, c) = 1.0;
    rbm(3 * a + 0, 3) = -y, rbm(3 * a + 1, 3) = x;
    rbm(3 * a + 1, 4) = -z, rbm(3 * a + 2, 4) = y;
    rbm(3 * a + 0, 5) = z, rbm(3 * a + 2, 5) = -x;
  }
  EXPECT_LE((k * rbm).norm(), 1e-12 * k.norm());
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  int zero = 0;
  for (int i = 0; i < 24; ++i) zero += std::abs(es.eigenvalues()(i)) < 1e-10 * es.eigenvalues().maxCoeff();
  EXPECT_EQ(zero, 6);
}

TEST(MandelAssembly, BlocksAreSymmetricPositive) {
  AssembledProblem pb = assemble_mandel(10, 1e-2);
  const ThreeFieldSystem& s = pb.system;
  Mat K = dense(s.K()), A = dense(s.A());
  EXPECT_LE((K - K.transpose()).norm(), 1e-14 * K.norm());
  EXPECT_LE((A - A.transpose()).norm(), 1e-14 * A.norm());
  Gen g(91);
  for (int trial = 0; trial < 100; ++trial) {
    testing::Vec x = testing::vec(g.vector(s.nu()));
    EXPECT_GT(x.dot(K * x), 0.0);
    testing::Vec y = testing::vec(g.vector(s.nq()));
    EXPECT_GT(y.dot(A * y), 0.0);
  }
  // Default materials are incompressible in the pore fluid.
  EXPECT_EQ(s.P().nnz() == 0 || dense(s.P()).norm() == 0.0, true);
  // The plate load shows up in the right-hand side.
  EXPECT_GT(norm2(pb.rhs.u), 0.0);
}

TEST(MandelAssembly, StorageGivesCellVolumeDiagonal) {
  GridSpec g{2, 1, 3, 1.0, 0.5, 1.5};
  MaterialParams mat;
  mat.storage_coefficient = 0.2;
  AssembledProblem pb = assemble_three_field(g, mat, 1.0);
  Mat P = dense(pb.system.P());
  const double vol = 0.5 * 0.5 * 0.5;
  EXPECT_LE((P - 0.2 * vol * Mat::Identity(6, 6)).norm(), 1e-15);
}

TEST(MandelAssembly, TimeStepEntersOnlyThroughGamma) {
  AssembledProblem a = assemble_mandel(10, 1e-3), b = assemble_mandel(10, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(a.system.gamma(), a.system.dt());
  EXPECT_DOUBLE_EQ(b.system.gamma(), 0.5 * b.system.dt());
  EXPECT_NEAR(b.system.dt() / a.system.dt(), 1e3, 1e-9);
  EXPECT_LE((dense(a.system.K()) - dense(b.system.K())).norm(), 0.0);
}

TEST(MandelValidation, RejectsBadInput) {
  MaterialParams mat;
  mat.poisson_ratio = 0.5;
  EXPECT_THROW(mat.validate(), InputError);
  mat = MaterialParams{};
  mat.young_modulus = -1.0;
  EXPECT_THROW(mat.validate(), InputError);
  GridSpec g{0, 1, 1};
  EXPECT_THROW(g.validate(), InputError);
  EXPECT_THROW(assemble_three_field(GridSpec{}, MaterialParams{}, -1.0), InputError);
}

}  // namespace
}  // namespace erpf

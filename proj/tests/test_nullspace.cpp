#include "dpsens/errors.hpp"
#include "dpsens/instances.hpp"
#include "dpsens/nullspace.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

#include <cmath>

namespace dpsens {
namespace {

using testing::scalar_chain;

TEST(Constraints, HandExample) {
  const auto qdp = scalar_chain(1, 1, 1, 0, 1, 1, 0, 0, 0, 1);
  const auto cs = assemble_constraints(qdp, PerturbationDirection::zero(qdp.dims()));
  Mat expected(2, 3);
  expected << 1, 0, 0, -1, -1, 1;
  EXPECT_EQ(cs.G, expected);
  EXPECT_EQ(cs.y, Vec::Zero(2));
}

TEST(Constraints, InitialStateDirection) {
  std::mt19937_64 rng(1);
  const auto qdp = random_sosc_instance(rng, {4, 3, 2, 2, 0.5});
  auto l = PerturbationDirection::zero(qdp.dims());
  l.l_minus1[0] = 1.0;
  const auto cs = assemble_constraints(qdp, l);
  Vec expected = Vec::Zero(qdp.dims().nc());
  expected[0] = 1.0;
  EXPECT_EQ(cs.y, expected);
}

TEST(Constraints, RightHandSideMatchesDenseCAction) {
  std::mt19937_64 rng(2);
  const auto qdp = random_sosc_instance(rng, {7, 2, 3, 3, 0.5});
  const auto& d = qdp.dims();
  const auto l = testing::random_direction(rng, d);
  // Dense map from l to y: identity on l_{-1}, block-diagonal C_k on l_k.
  Mat Cbig = Mat::Zero(d.nc(), d.nl());
  Cbig.topLeftCorner(d.nx, d.nx).setIdentity();
  for (int k = 0; k < d.N; ++k) Cbig.block((k + 1) * d.nx, d.nx + k * d.nd, d.nx, d.nd) = qdp.stage(k).C;
  const auto cs = assemble_constraints(qdp, l);
  EXPECT_LE((cs.y - Cbig * l.stacked()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Nullspace, OneDimensionalKernel) {
  const auto qdp = scalar_chain(1, 1, 1, 0, 1, 1, 0, 0, 0, 1);
  const auto Z = nullspace_basis(constraint_jacobian(qdp)).Z;
  ASSERT_EQ(Z.cols(), 1);
  const Vec expected = Eigen::Vector3d(0, 1, 1) / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(Z.col(0).dot(expected)), 1.0, 1e-14);
}

TEST(Nullspace, OrthonormalKernelOnRandomInstances) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto qdp = random_sosc_instance(rng, {2 + trial, 1 + trial % 4, 1 + (trial / 2) % 4, 2, 0.5});
    const Mat G = constraint_jacobian(qdp);
    const Mat Z = nullspace_basis(G).Z;
    EXPECT_EQ(Z.cols(), qdp.dims().N * qdp.dims().nu);
    EXPECT_LE((G * Z).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((Z.transpose() * Z - identity(Z.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Nullspace, RankDeficientJacobianIsRejected) {
  Mat G(2, 3);
  G << 1, 0, 0, 2, 0, 0;
  EXPECT_THROW(nullspace_basis(G), ValidationError);
}

/// The tridiagonal basis of the scalar chain with A = B = 1: column k moves
/// q_k and p_{k+1} by +1 and q_{k+1} by -1.
Mat tridiagonal_basis(int N) {
  const Dims d{N, 1, 1, 1};
  Mat Zt = Mat::Zero(d.nz(), N);
  for (int k = 0; k < N; ++k) {
    Zt(d.control_offset(k), k) = 1.0;
    Zt(d.state_offset(k + 1), k) = 1.0;
    if (k + 1 < N) Zt(d.control_offset(k + 1), k) = -1.0;
  }
  return Zt;
}

TEST(TridiagonalFamily, TridiagonalBasisGramBounds) {
  for (int N : {2, 5, 20, 80}) {
    const auto qdp = scalar_chain(N, 1, 1, 0, 1, 1, 0, 0, 0, 1);
    const Mat G = constraint_jacobian(qdp);
    const Mat Zt = tridiagonal_basis(N);
    EXPECT_LE((G * Zt).cwiseAbs().maxCoeff(), 0.0);
    const Mat gram = Zt.transpose() * Zt;
    EXPECT_GE(min_eig(gram), 1.0 - 1e-12);
    // Gershgorin gives 5, not 4; the largest eigenvalue approaches 5 as N grows.
    EXPECT_LE(max_eig(gram), 5.0);
    if (N >= 20) EXPECT_GT(max_eig(gram), 4.0);
    // Zt = Z1 Z2 with Z1 orthonormal: the computed basis spans the same space.
    const Mat Z = nullspace_basis(G).Z;
    EXPECT_LE((Z * (Z.transpose() * Zt) - Zt).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TridiagonalFamily, FamilyReachesGamma) {
  for (double g0 : {0.5, 1.0, 4.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      EXPECT_GE(reduced_hessian_gamma(tridiagonal_instance(40, g0, seed)), g0 - 1e-9);
    }
  }
}

TEST(TridiagonalFamily, FourGammaRecipeOnlyCertifiesFourFifths) {
  // a_k = 2|b_k| + 2|b_{k-1}| + 4 gamma0 with the 5I Gram bound guarantees 0.8 gamma0.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int N = 60;
  const double g0 = 1.0;
  std::vector<double> b(N);
  for (auto& v : b) v = u(rng);
  std::vector<StageBlocks> st;
  for (int k = 0; k < N; ++k) {
    const double bp = k > 0 ? std::abs(b[k - 1]) : 0.0;
    st.push_back(StageBlocks{testing::scalar(2 * std::abs(b[k]) + 2 * bp + 4 * g0), testing::scalar(b[k]),
                             testing::scalar(0), testing::scalar(0), testing::scalar(0), testing::scalar(1),
                             testing::scalar(1), testing::scalar(0)});
  }
  const QdpProblem qdp(Dims{N, 1, 1, 1}, st, testing::scalar(2 * std::abs(b.back()) + 4 * g0));
  EXPECT_GE(reduced_hessian_gamma(qdp), 0.8 * g0 - 1e-9);
}

TEST(Gamma, IdentityHessian) {
  std::mt19937_64 rng(4);
  auto qdp = random_sosc_instance(rng, {6, 2, 2, 1, 0.5});
  std::vector<StageBlocks> st = qdp.stages();
  for (auto& s : st) {
    s.Q = identity(2);
    s.R = identity(2);
    s.S.setZero();
  }
  EXPECT_NEAR(reduced_hessian_gamma(QdpProblem(qdp.dims(), st, identity(2))), 1.0, 1e-12);
}

TEST(Gamma, BenchmarkModel) {
  for (auto kind : {BenchmarkDynamics::Linear, BenchmarkDynamics::Exp}) {
    EXPECT_NEAR(reduced_hessian_gamma(benchmark_qdp(40, 10.0, 1.0, kind)), 9.0, 1e-9);
    EXPECT_NEAR(reduced_hessian_gamma(benchmark_qdp(60, 50.0, 10.0, kind)), 40.0, 1e-9);
  }
}

TEST(Gamma, InvariantUnderBasisRotation) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto qdp = random_sosc_instance(rng, {5, 2, 3, 1, 0.5});
    const Mat H = dense_hessian(qdp);
    const Mat Z = nullspace_basis(constraint_jacobian(qdp)).Z;
    Mat X(Z.cols(), Z.cols());
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = testing::random_vec(rng, 1)[0];
    const Mat Qr = Eigen::HouseholderQR<Mat>(X).householderQ();
    const Mat Zr = Z * Qr;
    const double g1 = reduced_hessian_gamma(qdp);
    const double g2 = min_eig(symmetrized(Zr.transpose() * H * Zr));
    EXPECT_NEAR(g1, g2, 1e-9 * std::max(1.0, std::abs(g1)));
  }
}

TEST(Gamma, BlockwiseLowerBound) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto base = random_sosc_instance(rng, {5, 2, 2, 1, 0.5});
    std::vector<StageBlocks> st = base.stages();
    double c = INFINITY;
    for (auto& s : st) {
      const Mat X = Mat::Random(4, 4);
      const Mat H = X * X.transpose() + 0.3 * identity(4);
      s.Q = H.topLeftCorner(2, 2);
      s.S = H.bottomLeftCorner(2, 2);
      s.R = H.bottomRightCorner(2, 2);
      c = std::min(c, min_eig(H));
    }
    const QdpProblem qdp(base.dims(), st, identity(2));
    c = std::min(c, 1.0);
    EXPECT_GE(reduced_hessian_gamma(qdp), c - 1e-9);
  }
}

}  // namespace
}  // namespace dpsens

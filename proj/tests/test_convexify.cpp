#include "dpsens/convexify.hpp"
#include "dpsens/errors.hpp"
#include "dpsens/instances.hpp"
#include "dpsens/nullspace.hpp"
#include "dpsens/riccati.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace dpsens {
namespace {

using testing::scalar_chain;

double max_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

TEST(Convexify, DecoupledStagesKeepR) {
  std::mt19937_64 rng(1);
  auto qdp = random_sosc_instance(rng, {5, 2, 2, 2, 0.5});
  std::vector<StageBlocks> st = qdp.stages();
  for (auto& s : st) {
    s.A.setZero();
    s.B.setZero();
    s.S.setZero();
    s.R = s.R.transpose() * s.R + identity(2);
  }
  const QdpProblem dec(qdp.dims(), st, qdp.terminal_Q());
  const double delta = 0.7;
  const auto conv = convexify(dec, delta);
  for (int k = 0; k < 5; ++k) {
    const auto& t = conv.problem.stage(k);
    EXPECT_LE(max_diff(t.R, dec.stage(k).R), 1e-14);
    EXPECT_LE(max_diff(t.Q, delta * identity(2)), 1e-14);
    EXPECT_LE(max_diff(conv.Qbar[k], dec.stage(k).Q - delta * identity(2)), 1e-14);
  }
}

TEST(Convexify, DecoupledScalarDiagonalOutput) {
  // S = 0, Q = R = gamma, A = B = 0 and delta = gamma give H~_k = diag(gamma, gamma).
  const double g = 2.5;
  const auto qdp = scalar_chain(6, g, g, 0, 0, 0, 0.7, 0.3, -0.4, g);
  const auto conv = convexify(qdp, g);
  for (int k = 0; k < 6; ++k) {
    const Mat H = conv.problem.stage_hessian(k);
    EXPECT_LE(max_diff(H, g * identity(2)), 1e-14);
  }
}

TEST(Convexify, TerminalBlockIsDeltaIdentity) {
  std::mt19937_64 rng(2);
  const auto qdp = random_sosc_instance(rng, {4, 3, 2, 1, 0.5});
  const auto conv = convexify(qdp, 0.2);
  EXPECT_LE(max_diff(conv.problem.terminal_Q(), 0.2 * identity(3)), 0.0);
  EXPECT_LE(max_diff(conv.Qbar.back(), qdp.terminal_Q() - 0.2 * identity(3)), 1e-14);
}

TEST(Convexify, SchurIdentityAndPositivity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 1 + trial % 3;
    const auto qdp = random_sosc_instance(rng, {3 + trial % 10, nx, 1 + (trial / 3) % 3, 2, 0.5});
    const double gamma = reduced_hessian_gamma(qdp);
    const double delta = 0.5 * gamma;
    const auto conv = convexify(qdp, delta, gamma);
    EXPECT_TRUE(conv.warnings.empty());
    const double ut = conv.upsilon_tilde();
    for (int k = 0; k < qdp.horizon(); ++k) {
      const auto& t = conv.problem.stage(k);
      const Mat schur = t.Q - t.S.transpose() * t.R.inverse() * t.S;
      EXPECT_LE(max_diff(schur, delta * identity(nx)), 1e-9 * std::max(1.0, t.Q.norm()));
      const double lmin = min_eig(conv.problem.stage_hessian(k));
      EXPECT_GT(lmin, 0.0);
      EXPECT_GE(lmin, (gamma / (gamma + ut)) * (gamma / (gamma + ut)) * delta - 1e-8);
    }
  }
}

TEST(Convexify, RtildeBoundedBelowByGamma) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int trial = 0; trial < 100; ++trial) {
    const auto qdp = random_sosc_instance(rng, {2 + trial % 12, 1 + trial % 3, 1 + (trial / 5) % 3, 1, 0.3});
    const double gamma = reduced_hessian_gamma(qdp);
    const auto conv = convexify(qdp, frac(rng) * gamma);
    EXPECT_GE(conv.min_rtilde_eig(), gamma - 1e-8);
    EXPECT_GT(conv.min_stage_eig(), 0.0);
  }
}

TEST(Convexify, ZeroDeltaMatchesRiccati) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto qdp = random_sosc_instance(rng, {3 + trial, 2, 2, 1, 0.5});
    const auto conv = convexify(qdp, 0.0);
    EXPECT_TRUE(conv.semidefinite);
    EXPECT_FALSE(conv.warnings.empty());
    const auto rs = backward_pass(qdp);
    for (int k = 0; k <= qdp.horizon(); ++k) EXPECT_LE(max_diff(conv.Qbar[k], rs.K[k]), 1e-10);
    for (int k = 0; k < qdp.horizon(); ++k) {
      EXPECT_LE(max_diff(conv.problem.stage(k).R, rs.W[k]), 1e-10);
      EXPECT_GT(min_eig(conv.problem.stage(k).R), 0.0);
      EXPECT_GE(min_eig(conv.problem.stage_hessian(k)), -1e-10);
    }
  }
}

TEST(Convexify, ShiftClaims) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto qdp = random_sosc_instance(rng, {4 + trial, 2, 3, 2, 0.5});
    const double delta = 0.5 * reduced_hessian_gamma(qdp);
    const auto a = convexify(qdp, delta);
    const auto b = convexify(shifted_problem(qdp, delta), 0.0);
    const Mat I = identity(2);
    for (int k = 0; k < qdp.horizon(); ++k) {
      const auto& sa = a.problem.stage(k);
      const auto& sb = b.problem.stage(k);
      EXPECT_LE(max_diff(sb.R, sa.R), 1e-10);
      EXPECT_LE(max_diff(sb.S, sa.S), 1e-10);
      EXPECT_LE(max_diff(b.Qbar[k], a.Qbar[k]), 1e-10);
      EXPECT_LE(max_diff(sb.Q, sa.Q - delta * I), 1e-10);
    }
  }
}

TEST(ShiftedProblem, ZeroAndScalar) {
  const auto qdp = scalar_chain(3, 3, 1, 0, 1, 1, 0, 0, 0, 3);
  const auto same = shifted_problem(qdp, 0.0);
  const auto one = shifted_problem(qdp, 1.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(same.stage(k).Q, qdp.stage(k).Q);
    EXPECT_DOUBLE_EQ(one.stage(k).Q(0, 0), 2.0);
  }
  EXPECT_DOUBLE_EQ(one.terminal_Q()(0, 0), 2.0);
}

TEST(Convexify, Errors) {
  const auto qdp = benchmark_qdp(10, 10.0, 1.0, BenchmarkDynamics::Linear);
  EXPECT_THROW(convexify(qdp, -1.0), ValidationError);
  // R~_k = 20 - 2 - delta becomes singular at delta = 18 and negative beyond.
  try {
    convexify(qdp, 18.0);
    FAIL() << "expected NonInvertibleRtilde";
  } catch (const NonInvertibleRtilde& e) {
    EXPECT_EQ(e.stage, 9);
  }
  try {
    convexify(qdp, 19.0);
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.stage, 9);
    EXPECT_LT(e.min_eigenvalue, 0.0);
  }
  // delta >= gamma is allowed with a warning when it still works.
  const auto warned = convexify(qdp, 10.0, 9.0);
  EXPECT_EQ(warned.warnings.size(), 1u);
}

TEST(SelectDelta, Arithmetic) {
  EXPECT_DOUBLE_EQ(select_delta_from_gamma(18.0, 0.9), 16.2);
  EXPECT_DOUBLE_EQ(select_delta_from_gamma(18.0, 0.5), 9.0);
  EXPECT_THROW(select_delta_from_gamma(0.0), SoscFailed);
  EXPECT_THROW(select_delta_from_gamma(-1.0), SoscFailed);
  EXPECT_THROW(select_delta_from_gamma(1.0, 1.0), ValidationError);
  EXPECT_NEAR(select_delta(benchmark_qdp(40, 10.0, 1.0, BenchmarkDynamics::Linear)), 8.1, 1e-9);
}

TEST(SelectDelta, SoscFailure) {
  const auto qdp = scalar_chain(4, -5, -1, 0, 1, 1, 0, 0, 0, -1);
  EXPECT_THROW(select_delta(qdp), SoscFailed);
}

TEST(Equivalence, ZeroDirection) {
  std::mt19937_64 rng(7);
  const auto qdp = random_sosc_instance(rng, {8, 2, 2, 2, 0.5});
  const auto conv = convexify(qdp, select_delta(qdp));
  const auto r = verify_equivalence(qdp, conv, PerturbationDirection::zero(qdp.dims()));
  EXPECT_EQ(r.original.stacked().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.convexified.stacked().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.offset, 0.0);
}

TEST(Equivalence, StageDirectionsHaveZeroOffset) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto qdp = random_sosc_instance(rng, {10, 2, 3, 2, 0.5});
    const auto conv = convexify(qdp, select_delta(qdp));
    for (int i : {0, 5, 9}) {
      auto l = PerturbationDirection::zero(qdp.dims());
      l.stages[i] = testing::random_vec(rng, 2);
      const auto r = verify_equivalence(qdp, conv, l);
      EXPECT_EQ(r.expected_offset, 0.0);
      EXPECT_LE(r.primal_gap, 1e-8);
      EXPECT_LE(r.offset_error, 1e-8);
    }
  }
}

TEST(Equivalence, InitialStateDirection) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto qdp = random_sosc_instance(rng, {12, 3, 2, 2, 0.5});
    const auto conv = convexify(qdp, select_delta(qdp));
    auto l = PerturbationDirection::zero(qdp.dims());
    l.l_minus1 = testing::random_vec(rng, 3);
    const auto r = verify_equivalence(qdp, conv, l);
    EXPECT_LE(r.primal_gap, 1e-8);
    EXPECT_LE(r.offset_error, 1e-8);
    EXPECT_NE(r.expected_offset, 0.0);
  }
}

}  // namespace
}  // namespace dpsens

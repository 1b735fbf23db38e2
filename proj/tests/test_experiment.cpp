#include "dpsens/errors.hpp"
#include "dpsens/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace dpsens {
namespace {

TEST(ExperimentConfig, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.source_stage(), 20);
  auto bad = c;
  bad.mu2 = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.mu1 = 1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.eps = {0.1, -0.1};
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.stage = 40;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = c;
  bad.N = 1;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Experiment, LinearCurvesMatchReference) {
  ExperimentConfig c;
  c.N = 20;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.curves.size(), 3u);
  ASSERT_EQ(r.reference_ratio.size(), 21u);
  // Linear dynamics: the response is exactly linear in eps.
  for (const auto& cv : r.curves) {
    EXPECT_FALSE(cv.error.has_value());
    for (int k = 0; k <= 20; ++k) EXPECT_NEAR(cv.ratio[k], r.reference_ratio[k], 1e-8);
  }
  EXPECT_NEAR(r.reference_ratio[10], 1.0 / 9.0, 1e-10);
  EXPECT_NEAR(r.reference_ratio[11], 20.0 / 9.0, 1e-10);
  EXPECT_EQ(r.reference_log_ratio[0], kLogRatioClamp);
}

TEST(Experiment, ExpCurvesApproachReference) {
  ExperimentConfig c;
  c.N = 20;
  c.kind = BenchmarkDynamics::Exp;
  c.parallel = true;
  const auto r = run_experiment(c);
  // x_{i+1}(eps) / eps = mu1 (eps + expm1(eps)) / ((mu1 - mu2) eps).
  for (const auto& cv : r.curves) {
    const double expect = 10.0 * (cv.eps + std::expm1(cv.eps)) / (9.0 * cv.eps);
    EXPECT_NEAR(cv.ratio[11], expect, 1e-9);
  }
  EXPECT_LT(std::abs(r.curves[2].log_ratio[11] - r.reference_log_ratio[11]), 0.01);
}

TEST(Experiment, LogRatioCsv) {
  std::ostringstream os;
  write_log_ratio_csv(os, {-1.5, kLogRatioClamp});
  EXPECT_EQ(os.str(), "k,log_ratio\n0,-1.5\n1,-500\n");
  EXPECT_STREQ(dynamics_name(BenchmarkDynamics::Exp), "exp");
}

}  // namespace
}  // namespace dpsens

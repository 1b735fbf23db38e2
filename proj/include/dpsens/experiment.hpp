#pragma once

#include "dpsens/instances.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dpsens {

/// Perturbation experiment on the scalar model of benchmark_model(): the reference
/// d_i is moved by eps at one stage and log(|x_k(eps) - x_k(0)| / eps) is
/// recorded for every k.
struct ExperimentConfig {
  int N = 40;
  double mu1 = 10.0;
  double mu2 = 1.0;
  BenchmarkDynamics kind = BenchmarkDynamics::Linear;
  std::vector<double> eps{1.0, 0.1, 0.01};
  std::optional<int> stage;  // defaults to N / 2
  int coord = 0;
  bool parallel = false;

  [[nodiscard]] int source_stage() const { return stage.value_or(N / 2); }
  /// Throws ValidationError unless N >= 2, mu1 > mu2 > 0, every eps > 0 and the stage is valid.
  void validate() const;
};

inline constexpr double kLogRatioClamp = -500.0;

struct ExperimentCurve {
  double eps = 0.0;
  std::vector<double> ratio;      // |x_k(eps) - x_k(0)| / eps, k = 0..N
  std::vector<double> log_ratio;  // log(ratio) clamped below at -500
  int iterations = 0;
  std::optional<std::string> error;  // set when the Newton solve diverged
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentCurve> curves;  // one per eps, in config order
  std::vector<double> reference_ratio;  // |p_k| of the directional derivative
  std::vector<double> reference_log_ratio;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

const char* dynamics_name(BenchmarkDynamics kind);

/// Header `k,log_ratio`, 17 significant digits.
void write_log_ratio_csv(std::ostream& os, const std::vector<double>& log_ratio);

}  // namespace dpsens

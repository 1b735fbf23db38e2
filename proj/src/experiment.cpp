#include "dpsens/experiment.hpp"

#include "dpsens/errors.hpp"
#include "dpsens/io.hpp"
#include "dpsens/sensitivity.hpp"
#include "dpsens/verify.hpp"

#include <cmath>
#include <future>
#include <ostream>

namespace dpsens {

void ExperimentConfig::validate() const {
  if (N < 2) throw ValidationError("experiment horizon must be >= 2");
  if (!(mu1 > mu2 && mu2 > 0.0)) throw ValidationError("experiment needs mu1 > mu2 > 0");
  if (eps.empty()) throw ValidationError("experiment needs at least one eps");
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ValidationError("every eps must be finite and > 0");
  }
  const int i = source_stage();
  if (i < 0 || i >= N) throw ValidationError("perturbed stage must lie in [0, N-1]");
  if (coord != 0) throw ValidationError("the scalar model has a single reference coordinate");
}

const char* dynamics_name(BenchmarkDynamics kind) { return kind == BenchmarkDynamics::Exp ? "exp" : "linear"; }

namespace {

double clamp_log(double v) { return v > 0.0 ? std::max(std::log(v), kLogRatioClamp) : kLogRatioClamp; }

ExperimentCurve run_one(const NldpModel& m, const NewtonResult& base, const PerturbationDirection& l, double eps) {
  ExperimentCurve c;
  c.eps = eps;
  try {
    const auto sol = newton_equality_solve(m, Vec(m.d0 + eps * l.stacked()), base.w);
    c.iterations = sol.iterations;
    for (std::size_t k = 0; k < sol.w.p.size(); ++k) {
      const double r = (sol.w.p[k] - base.w.p[k]).norm() / eps;
      c.ratio.push_back(r);
      c.log_ratio.push_back(clamp_log(r));
    }
  } catch (const SolverDiverged& e) {
    c.error = e.what();
  }
  return c;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  const NldpModel m = benchmark_model(cfg.N, cfg.mu1, cfg.mu2, cfg.kind);
  const auto l = unit_direction(m.dims, cfg.source_stage(), cfg.coord);
  const auto base = newton_equality_solve(m, m.d0, m.base);

  if (cfg.parallel) {
    std::vector<std::future<ExperimentCurve>> jobs;
    for (double e : cfg.eps) jobs.push_back(std::async(std::launch::async, run_one, std::cref(m), std::cref(base), std::cref(l), e));
    for (auto& j : jobs) res.curves.push_back(j.get());
  } else {
    for (double e : cfg.eps) res.curves.push_back(run_one(m, base, l, e));
  }

  const auto sens = solve_sensitivity(assemble_qdp_from_nldp(m), l);
  for (double v : sens.norm_p) {
    res.reference_ratio.push_back(v);
    res.reference_log_ratio.push_back(clamp_log(v));
  }
  return res;
}

void write_log_ratio_csv(std::ostream& os, const std::vector<double>& log_ratio) {
  os << "k,log_ratio\n";
  for (std::size_t k = 0; k < log_ratio.size(); ++k) os << k << ',' << io::format_double(log_ratio[k]) << '\n';
}

}  // namespace dpsens

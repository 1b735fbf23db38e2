// Command-line front end: assumption checks, convexification, sensitivity
// sweeps and the perturbation experiment on the scalar benchmark model.

#include "dpsens/convexify.hpp"
#include "dpsens/errors.hpp"
#include "dpsens/experiment.hpp"
#include "dpsens/instances.hpp"
#include "dpsens/io.hpp"
#include "dpsens/nullspace.hpp"
#include "dpsens/riccati.hpp"
#include "dpsens/sensitivity.hpp"
#include "dpsens/verify.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using dpsens::io::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kSolver = 2, kIo = 3 };

struct InputOptions {
  std::string input;
  int N = 40;
  double mu1 = 10.0;
  double mu2 = 1.0;
  double gamma = 1.0;
  std::uint64_t seed = 0;
};

struct Loaded {
  dpsens::QdpProblem qdp;
  std::optional<dpsens::NldpModel> model;  // set for the built-in NLDP models
};

Loaded load(const InputOptions& in) {
  using dpsens::BenchmarkDynamics;
  if (in.input == "paper-sec7-linear" || in.input == "paper-sec7-exp") {
    const auto kind = in.input == "paper-sec7-exp" ? BenchmarkDynamics::Exp : BenchmarkDynamics::Linear;
    auto m = dpsens::benchmark_model(in.N, in.mu1, in.mu2, kind);
    auto qdp = dpsens::assemble_qdp_from_nldp(m);
    return {std::move(qdp), std::move(m)};
  }
  if (in.input == "remark1") return {dpsens::tridiagonal_instance(in.N, in.gamma, in.seed), std::nullopt};
  return {dpsens::io::read_qdp_file(in.input), std::nullopt};
}

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("input", in.input, "QDP JSON file or paper-sec7-linear | paper-sec7-exp | remark1")->required();
  cmd->add_option("--N", in.N, "Horizon of built-in models");
  cmd->add_option("--mu1", in.mu1, "mu1 of the benchmark models");
  cmd->add_option("--mu2", in.mu2, "mu2 of the benchmark models");
  cmd->add_option("--gamma", in.gamma, "gamma0 of the remark1 family");
  cmd->add_option("--seed", in.seed, "Seed of the remark1 family");
}

void emit(const json& report, bool as_json, const std::string& text, const std::string& output) {
  if (!output.empty()) dpsens::io::write_json_file(output, report);
  if (as_json) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---- check -----------------------------------------------------------------

struct CheckArgs {
  InputOptions in;
  double lambda_C = 1e-3;
  std::optional<int> t_max;
  bool json = false;
  std::string output;
};

int run_check(const CheckArgs& a) {
  const auto loaded = load(a.in);
  const auto& qdp = loaded.qdp;
  const double gamma = dpsens::reduced_hessian_gamma(qdp);
  const auto ctrl = dpsens::controllability(qdp, a.lambda_C, a.t_max.value_or(qdp.horizon()));
  const bool sosc = gamma > 0.0;
  json rep{{"gamma", gamma},
           {"upsilon", qdp.max_block_norm()},
           {"sosc", sosc},
           {"controllability", dpsens::io::to_json(ctrl)},
           {"pass", sosc && ctrl.pass}};
  std::ostringstream os;
  os << "gamma (min eigenvalue of reduced Hessian): " << fmt(gamma) << (sosc ? "  [pass]" : "  [FAIL]") << '\n';
  os << "upsilon (max block norm): " << fmt(qdp.max_block_norm()) << '\n';
  os << "controllability (lambda_C = " << fmt(a.lambda_C) << "): " << (ctrl.pass ? "pass" : "FAIL") << ", t = " << ctrl.t
     << '\n';
  os << "  k  t_k  min_eig(Xi Xi^T)\n";
  for (std::size_t k = 0; k < ctrl.t_k.size(); ++k) {
    os << "  " << k << "  " << (ctrl.t_k[k] ? std::to_string(*ctrl.t_k[k]) : std::string("-")) << "  "
       << fmt(ctrl.gramian_min_eig[k]) << '\n';
  }
  emit(rep, a.json, os.str(), a.output);
  return sosc && ctrl.pass ? kOk : kValidation;
}

// ---- convexify -------------------------------------------------------------

struct ConvexifyArgs {
  InputOptions in;
  std::string delta = "auto";
  double fraction = 0.9;
  bool json = false;
  std::string output;
};

int run_convexify(const ConvexifyArgs& a) {
  const auto loaded = load(a.in);
  const auto& qdp = loaded.qdp;
  const double gamma = dpsens::reduced_hessian_gamma(qdp);
  double delta = 0.0;
  if (a.delta == "auto") {
    delta = dpsens::select_delta_from_gamma(gamma, a.fraction);
  } else {
    try {
      std::size_t pos = 0;
      delta = std::stod(a.delta, &pos);
      if (pos != a.delta.size()) throw std::invalid_argument(a.delta);
    } catch (const std::logic_error&) {
      throw dpsens::ValidationError("--delta expects a number or 'auto', got '" + a.delta + "'");
    }
  }
  const auto conv = dpsens::convexify(qdp, delta, gamma);
  for (const auto& w : conv.warnings) std::cerr << "warning: " << w << '\n';

  json out = dpsens::io::to_json(conv);
  out["gamma"] = gamma;
  out["min_stage_eig"] = conv.min_stage_eig();
  out["min_rtilde_eig"] = conv.min_rtilde_eig();
  std::ostringstream os;
  os << "gamma = " << fmt(gamma) << ", delta = " << fmt(delta) << '\n';
  os << "min eigenvalue of convexified stage Hessians: " << fmt(conv.min_stage_eig()) << '\n';
  os << "min eigenvalue of R~: " << fmt(conv.min_rtilde_eig()) << '\n';
  if (delta == 0.0) {
    // Qbar_k(0) coincides with the Riccati cost-to-go K_k of the original data.
    try {
      const auto rs = dpsens::backward_pass(qdp);
      double gap = 0.0;
      for (std::size_t k = 0; k < rs.K.size(); ++k) gap = std::max(gap, dpsens::max_abs(rs.K[k] - conv.Qbar[k]));
      out["riccati_gap"] = gap;
      os << "max |Qbar_k - K_k| = " << fmt(gap) << '\n';
    } catch (const dpsens::IndefiniteW& e) {
      out["riccati_gap"] = nullptr;
      os << "Riccati comparison skipped: " << e.what() << '\n';
    }
  }
  if (!a.output.empty()) dpsens::io::write_json_file(a.output, out);
  if (a.json) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << os.str();
  }
  return kOk;
}

// ---- sensitivity -----------------------------------------------------------

struct SensitivityArgs {
  InputOptions in;
  int stage = 0;
  int coord = 0;
  double fraction = 0.9;
  double lambda_C = 1e-3;
  std::optional<int> t_max;
  bool json = false;
  std::string output;
};

int run_sensitivity(const SensitivityArgs& a) {
  const auto loaded = load(a.in);
  const dpsens::SensitivitySolver solver(loaded.qdp, a.fraction);
  const auto l = dpsens::unit_direction(loaded.qdp.dims(), a.stage, a.coord);
  const auto res = solver.solve(l);

  std::optional<dpsens::BoundsReport> bounds;
  std::string bounds_error;
  try {
    dpsens::ConstantsOptions opts;
    opts.lambda_C = a.lambda_C;
    opts.t_max = a.t_max;
    bounds = dpsens::theoretical_constants(loaded.qdp, solver.convexified(), solver.gamma(), opts);
  } catch (const dpsens::ValidationError& e) {
    bounds_error = e.what();
  }

  bool bound_holds = true;
  if (bounds) {
    const auto norms = res.stage_norms();
    for (std::size_t k = 0; k < norms.size(); ++k) {
      if (norms[k] > bounds->decay_bound(a.stage, static_cast<int>(k)) + 1e-9) bound_holds = false;
    }
  }

  json summary{{"stage", a.stage},
               {"coord", a.coord},
               {"gamma", res.gamma},
               {"delta", res.delta},
               {"rho_fit", res.fit ? json(res.fit->rho_fit) : json(nullptr)},
               {"rho_theory", bounds ? json(bounds->rho) : json(nullptr)},
               {"upsilon_pq", bounds ? json(bounds->upsilon_pq) : json(nullptr)},
               {"bound_holds", bounds ? json(bound_holds) : json(nullptr)}};
  if (bounds) summary["bounds"] = dpsens::io::to_json(*bounds);
  if (!bounds_error.empty()) summary["bounds_error"] = bounds_error;

  const dpsens::BoundsReport* bp = bounds ? &*bounds : nullptr;
  if (a.output.empty()) {
    dpsens::io::write_decay_csv(std::cout, res, bp, a.stage);
  } else {
    const fs::path csv(a.output);
    std::ofstream out(csv);
    if (!out) throw dpsens::ParseError("cannot write " + csv.string());
    dpsens::io::write_decay_csv(out, res, bp, a.stage);
    fs::path summary_path = csv;
    summary_path.replace_extension(".summary.json");
    dpsens::io::write_json_file(summary_path, summary);
  }
  if (a.json) {
    std::cerr << summary.dump(2) << '\n';
  } else if (!a.output.empty()) {
    std::cout << "gamma = " << fmt(res.gamma) << ", delta = " << fmt(res.delta) << '\n';
    std::cout << "rho_fit = " << (res.fit ? fmt(res.fit->rho_fit) : std::string("n/a"))
              << ", rho_theory = " << (bounds ? fmt(bounds->rho) : std::string("n/a"))
              << ", upsilon_pq = " << (bounds ? fmt(bounds->upsilon_pq) : std::string("n/a")) << '\n';
    if (!bounds_error.empty()) std::cout << "theoretical constants unavailable: " << bounds_error << '\n';
  }
  return bounds && !bound_holds ? kValidation : kOk;
}

// ---- experiment ------------------------------------------------------------

struct ExperimentArgs {
  dpsens::ExperimentConfig cfg;
  std::string dynamics = "both";
  std::optional<int> stage;
  bool json = false;
  std::string output = ".";
};

std::string eps_tag(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", e);
  return buf;
}

int run_experiment_cmd(ExperimentArgs a) {
  std::vector<dpsens::BenchmarkDynamics> kinds;
  if (a.dynamics == "linear" || a.dynamics == "both") kinds.push_back(dpsens::BenchmarkDynamics::Linear);
  if (a.dynamics == "exp" || a.dynamics == "both") kinds.push_back(dpsens::BenchmarkDynamics::Exp);
  if (kinds.empty()) throw dpsens::ValidationError("--dynamics must be linear, exp or both");
  a.cfg.stage = a.stage;
  a.cfg.validate();
  const fs::path dir(a.output);
  fs::create_directories(dir);

  json report = json::array();
  bool diverged = false;
  for (auto kind : kinds) {
    a.cfg.kind = kind;
    const auto res = dpsens::run_experiment(a.cfg);
    const std::string name = dpsens::dynamics_name(kind);
    auto write = [&](const fs::path& p, const std::vector<double>& v) {
      std::ofstream out(p);
      if (!out) throw dpsens::ParseError("cannot write " + p.string());
      dpsens::write_log_ratio_csv(out, v);
    };
    write(dir / (name + "_reference.csv"), res.reference_log_ratio);
    json entry{{"dynamics", name}, {"N", a.cfg.N}, {"mu1", a.cfg.mu1}, {"mu2", a.cfg.mu2},
               {"stage", a.cfg.source_stage()}, {"curves", json::array()}};
    for (const auto& c : res.curves) {
      json jc{{"eps", c.eps}};
      if (c.error) {
        diverged = true;
        jc["error"] = *c.error;
        std::cerr << name << " eps=" << eps_tag(c.eps) << ": " << *c.error << '\n';
      } else {
        const fs::path p = dir / (name + "_eps" + eps_tag(c.eps) + ".csv");
        write(p, c.log_ratio);
        jc["file"] = p.string();
        jc["newton_iterations"] = c.iterations;
      }
      entry["curves"].push_back(std::move(jc));
    }
    report.push_back(std::move(entry));
  }
  if (a.json) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << "wrote experiment CSVs to " << dir.string() << '\n';
  }
  return diverged ? kSolver : kOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  InputOptions in;
  double fraction = 0.9;
  bool json = false;
  std::string output;
};

int run_verify(const VerifyArgs& a) {
  const auto loaded = load(a.in);
  const auto& qdp = loaded.qdp;
  const dpsens::SensitivitySolver solver(qdp, a.fraction);
  const int N = qdp.horizon();
  json rep{{"gamma", solver.gamma()}, {"delta", solver.delta()},
           {"riccati_identity_residual", solver.riccati().max_identity_residual()}, {"directions", json::array()}};
  bool pass = solver.riccati().max_identity_residual() <= 1e-9;
  std::ostringstream os;
  os << "gamma = " << fmt(solver.gamma()) << ", delta = " << fmt(solver.delta()) << '\n';
  os << "Riccati identity residual: " << fmt(solver.riccati().max_identity_residual()) << '\n';
  for (int i : {-1, 0, N / 2, N - 1}) {
    const auto l = dpsens::unit_direction(qdp.dims(), i, 0);
    const auto eq = dpsens::verify_equivalence(qdp, solver.convexified(), l);
    const bool ok = eq.primal_gap <= 1e-8 && eq.offset_error <= 1e-8;
    pass = pass && ok;
    rep["directions"].push_back(json{{"stage", i}, {"primal_gap", eq.primal_gap}, {"offset", eq.offset},
                                     {"expected_offset", eq.expected_offset}, {"pass", ok}});
    os << "direction in Pi_" << i << ": primal gap " << fmt(eq.primal_gap) << ", offset " << fmt(eq.offset)
       << " (expected " << fmt(eq.expected_offset) << ") " << (ok ? "[pass]" : "[FAIL]") << '\n';
  }
  if (loaded.model) {
    const auto hc = dpsens::finite_diff_hessian_check(*loaded.model);
    pass = pass && hc.pass();
    rep["hessian_check"] = json{{"max_error", hc.worst.error}, {"worst_block", hc.worst.block},
                                {"worst_stage", hc.worst.stage}, {"pass", hc.pass()}};
    os << "finite-difference derivative check: max error " << fmt(hc.worst.error) << " in " << hc.worst.block
       << " at stage " << hc.worst.stage << (hc.pass() ? " [pass]" : " [FAIL]") << '\n';
  }
  rep["pass"] = pass;
  emit(rep, a.json, os.str(), a.output);
  return pass ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity analysis of nonconvex dynamic programs"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Check the reduced-Hessian and controllability assumptions");
  add_input(c, check.in);
  c->add_option("--lambda-c", check.lambda_C, "Controllability Gramian lower bound");
  c->add_option("--t-max", check.t_max, "Largest controllability window");
  c->add_flag("--json", check.json, "Print the report as JSON");
  c->add_option("-o,--output", check.output, "Write the JSON report to this file");

  ConvexifyArgs conv;
  auto* v = app.add_subcommand("convexify", "Convexify a QDP by linear shifting");
  add_input(v, conv.in);
  v->add_option("--delta", conv.delta, "Shift delta, or 'auto' for fraction * gamma");
  v->add_option("--fraction", conv.fraction, "Fraction of gamma used by --delta auto");
  v->add_flag("--json", conv.json, "Print the result as JSON");
  v->add_option("-o,--output", conv.output, "Write the convexified QDP JSON to this file");

  SensitivityArgs sens;
  auto* s = app.add_subcommand("sensitivity", "Directional derivative for a unit perturbation");
  add_input(s, sens.in);
  s->add_option("--stage", sens.stage, "Perturbed stage i (-1 for the initial state)");
  s->add_option("--coord", sens.coord, "Perturbed coordinate (0-based)");
  s->add_option("--fraction", sens.fraction, "delta = fraction * gamma");
  s->add_option("--lambda-c", sens.lambda_C, "Controllability Gramian lower bound");
  s->add_option("--t-max", sens.t_max, "Largest controllability window");
  s->add_flag("--json", sens.json, "Print the summary as JSON on stderr");
  s->add_option("-o,--output", sens.output, "Decay CSV path (summary goes to <stem>.summary.json)");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Perturbation experiment on the scalar benchmark model");
  e->add_option("--N", exp.cfg.N, "Horizon");
  e->add_option("--mu1", exp.cfg.mu1, "mu1");
  e->add_option("--mu2", exp.cfg.mu2, "mu2");
  e->add_option("--dynamics", exp.dynamics, "linear, exp or both");
  e->add_option("--eps", exp.cfg.eps, "Perturbation sizes")->delimiter(',');
  e->add_option("--stage", exp.stage, "Perturbed stage (default N/2)");
  e->add_option("--coord", exp.cfg.coord, "Perturbed coordinate (0-based)");
  e->add_flag("--parallel", exp.cfg.parallel, "Solve the eps values concurrently");
  e->add_flag("--json", exp.json, "Print the run summary as JSON");
  e->add_option("-o,--output", exp.output, "Output directory");

  VerifyArgs ver;
  auto* r = app.add_subcommand("verify", "Cross-check the Riccati pipeline against the dense KKT oracle");
  add_input(r, ver.in);
  r->add_option("--fraction", ver.fraction, "delta = fraction * gamma");
  r->add_flag("--json", ver.json, "Print the report as JSON");
  r->add_option("-o,--output", ver.output, "Write the JSON report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*c) return run_check(check);
    if (*v) return run_convexify(conv);
    if (*s) return run_sensitivity(sens);
    if (*e) return run_experiment_cmd(exp);
    if (*r) return run_verify(ver);
  } catch (const dpsens::ParseError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIo;
  } catch (const dpsens::ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const dpsens::ShapeError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const dpsens::SoscFailed& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const dpsens::NonInvertibleRtilde& err) {
    // delta outside the admissible interval
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const dpsens::NotPositiveDefinite& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const dpsens::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kSolver;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIo;
  }
  return kOk;
}

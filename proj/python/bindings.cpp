#include "dpsens/convexify.hpp"
#include "dpsens/errors.hpp"
#include "dpsens/experiment.hpp"
#include "dpsens/instances.hpp"
#include "dpsens/io.hpp"
#include "dpsens/nullspace.hpp"
#include "dpsens/riccati.hpp"
#include "dpsens/sensitivity.hpp"
#include "dpsens/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

namespace py = pybind11;
using namespace dpsens;

namespace {

Mat block(const py::dict& d, const char* key) {
  if (!d.contains(key)) throw ValidationError(std::string("stage dict is missing \"") + key + "\"");
  return d[key].cast<Mat>();
}

QdpProblem make_qdp(int N, int nx, int nu, int nd, const std::vector<py::dict>& stages, const Mat& terminal_Q) {
  std::vector<StageBlocks> st;
  for (const auto& s : stages) {
    st.push_back(StageBlocks{block(s, "Q"), block(s, "R"), block(s, "S"), block(s, "D1"), block(s, "D2"),
                             block(s, "A"), block(s, "B"), block(s, "C")});
  }
  return QdpProblem(Dims{N, nx, nu, nd}, std::move(st), terminal_Q);
}

py::dict stage_dict(const StageBlocks& s) {
  py::dict d;
  d["Q"] = s.Q;
  d["R"] = s.R;
  d["S"] = s.S;
  d["D1"] = s.D1;
  d["D2"] = s.D2;
  d["A"] = s.A;
  d["B"] = s.B;
  d["C"] = s.C;
  return d;
}

py::dict trajectory_dict(const Trajectory& w) {
  py::dict d;
  d["p"] = w.p;
  d["q"] = w.q;
  d["w"] = w.stacked();
  return d;
}

PerturbationDirection direction(const QdpProblem& qdp, const Vec& l) {
  return PerturbationDirection::from_stacked(qdp.dims(), l);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sensitivity analysis of discrete-time dynamic programs";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<SoscFailed>(m, "SoscFailed", base.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());
  py::register_exception<SolverDiverged>(m, "SolverDiverged", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<QdpProblem>(m, "QdpProblem")
      .def(py::init(&make_qdp), py::arg("N"), py::arg("nx"), py::arg("nu"), py::arg("nd"), py::arg("stages"),
           py::arg("terminal_Q"))
      .def_static("from_json", [](const std::string& s) { return io::qdp_from_json(io::json::parse(s)); })
      .def("to_json", [](const QdpProblem& q) { return io::to_json(q).dump(); })
      .def_property_readonly("N", [](const QdpProblem& q) { return q.dims().N; })
      .def_property_readonly("nx", [](const QdpProblem& q) { return q.dims().nx; })
      .def_property_readonly("nu", [](const QdpProblem& q) { return q.dims().nu; })
      .def_property_readonly("nd", [](const QdpProblem& q) { return q.dims().nd; })
      .def("stage", [](const QdpProblem& q, int k) { return stage_dict(q.stage(k)); })
      .def_property_readonly("terminal_Q", &QdpProblem::terminal_Q)
      .def("dense_hessian", [](const QdpProblem& q) { return dense_hessian(q); })
      .def("constraint_jacobian", [](const QdpProblem& q) { return constraint_jacobian(q); });

  m.def("benchmark_qdp", [](int N, double mu1, double mu2, const std::string& kind) {
        return benchmark_qdp(N, mu1, mu2, kind == "exp" ? BenchmarkDynamics::Exp : BenchmarkDynamics::Linear);
      }, py::arg("N") = 40, py::arg("mu1") = 10.0, py::arg("mu2") = 1.0, py::arg("dynamics") = "linear");
  m.def("tridiagonal_instance", &tridiagonal_instance, py::arg("N"), py::arg("gamma0"), py::arg("seed") = 0);
  m.def("random_instance", [](int N, int nx, int nu, int nd, double gamma0, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return random_sosc_instance(rng, {N, nx, nu, nd, gamma0});
      }, py::arg("N"), py::arg("nx"), py::arg("nu"), py::arg("nd"), py::arg("gamma0") = 0.5, py::arg("seed") = 0);

  m.def("reduced_hessian_gamma", py::overload_cast<const QdpProblem&>(&reduced_hessian_gamma));

  m.def("convexify", [](const QdpProblem& q, double delta) {
        const auto c = convexify(q, delta);
        py::dict d;
        d["delta"] = c.delta;
        d["problem"] = c.problem;
        d["Qbar"] = c.Qbar;
        d["semidefinite"] = c.semidefinite;
        d["warnings"] = c.warnings;
        d["upsilon_tilde"] = c.upsilon_tilde();
        return d;
      }, py::arg("qdp"), py::arg("delta"));

  m.def("unit_direction", [](const QdpProblem& q, int i, int j) { return unit_direction(q.dims(), i, j).stacked(); },
        py::arg("qdp"), py::arg("stage"), py::arg("coord") = 0);

  m.def("dense_kkt_solve", [](const QdpProblem& q, const Vec& l) {
        return trajectory_dict(dense_kkt_solve(q, direction(q, l)).w);
      }, py::arg("qdp"), py::arg("l"));

  m.def("riccati_solve", [](const QdpProblem& q, const Vec& l) {
        return trajectory_dict(forward_solve(backward_pass(q), q, direction(q, l)));
      }, py::arg("qdp"), py::arg("l"));

  m.def("solve_sensitivity", [](const QdpProblem& q, int stage, int coord, double fraction) {
        const auto r = solve_sensitivity(q, unit_direction(q.dims(), stage, coord), fraction);
        py::dict d = trajectory_dict(r.w);
        d["norm_p"] = r.norm_p;
        d["norm_q"] = r.norm_q;
        d["gamma"] = r.gamma;
        d["delta"] = r.delta;
        d["rho_fit"] = r.fit ? py::cast(r.fit->rho_fit) : py::none();
        return d;
      }, py::arg("qdp"), py::arg("stage"), py::arg("coord") = 0, py::arg("fraction") = 0.9);

  m.def("verify_equivalence", [](const QdpProblem& q, const Vec& l, double fraction) {
        const auto r = verify_equivalence(q, convexify(q, select_delta(q, fraction)), direction(q, l));
        py::dict d;
        d["primal_gap"] = r.primal_gap;
        d["offset"] = r.offset;
        d["expected_offset"] = r.expected_offset;
        d["offset_error"] = r.offset_error;
        return d;
      }, py::arg("qdp"), py::arg("l"), py::arg("fraction") = 0.9);

  m.def("theoretical_constants", [](const QdpProblem& q, double delta, double lambda_C) {
        ConstantsOptions opts;
        opts.lambda_C = lambda_C;
        return py::module_::import("json").attr("loads")(io::to_json(theoretical_constants(q, delta, opts)).dump());
      }, py::arg("qdp"), py::arg("delta"), py::arg("lambda_C") = 1e-3);

  m.def("run_experiment", [](int N, double mu1, double mu2, const std::string& kind, std::vector<double> eps) {
        ExperimentConfig c;
        c.N = N;
        c.mu1 = mu1;
        c.mu2 = mu2;
        c.kind = kind == "exp" ? BenchmarkDynamics::Exp : BenchmarkDynamics::Linear;
        c.eps = std::move(eps);
        const auto r = run_experiment(c);
        py::dict d;
        py::dict curves;
        for (const auto& cv : r.curves) curves[py::float_(cv.eps)] = cv.log_ratio;
        d["curves"] = curves;
        d["reference"] = r.reference_log_ratio;
        return d;
      }, py::arg("N") = 40, py::arg("mu1") = 10.0, py::arg("mu2") = 1.0, py::arg("dynamics") = "linear",
      py::arg("eps") = std::vector<double>{1.0, 0.1, 0.01});
}

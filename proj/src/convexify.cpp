#include "dpsens/convexify.hpp"

#include "dpsens/errors.hpp"
#include "dpsens/nullspace.hpp"
#include "dpsens/riccati.hpp"
#include "dpsens/verify.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dpsens {

double ConvexifiedQdp::upsilon_tilde() const {
  double m = delta;
  for (const auto& s : problem.stages()) {
    for (const Mat* b : {&s.Q, &s.R, &s.S, &s.D1, &s.D2}) m = std::max(m, op_norm(*b));
  }
  return m;
}

double ConvexifiedQdp::min_stage_eig() const {
  double m = INFINITY;
  for (int k = 0; k < problem.horizon(); ++k) m = std::min(m, min_eig(problem.stage_hessian(k)));
  return m;
}

double ConvexifiedQdp::min_rtilde_eig() const {
  double m = INFINITY;
  for (const auto& s : problem.stages()) m = std::min(m, min_eig(s.R));
  return m;
}

namespace {

ConvexifiedQdp run(const QdpProblem& qdp, double delta) {
  const auto& d = qdp.dims();
  const int N = d.N;
  const Mat I = identity(d.nx);
  std::vector<Mat> Qbar(static_cast<std::size_t>(N + 1));
  std::vector<StageBlocks> out(static_cast<std::size_t>(N));
  Qbar[static_cast<std::size_t>(N)] = qdp.terminal_Q() - delta * I;
  for (int k = N - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& s = qdp.stage(k);
    const Mat& Qb = Qbar[i + 1];
    const Mat QbA = Qb * s.A;
    const Mat QbB = Qb * s.B;
    const Mat Qhat = s.Q + s.A.transpose() * QbA;
    StageBlocks t;
    t.S = s.S + s.B.transpose() * QbA;
    t.R = symmetrized(s.R + s.B.transpose() * QbB);
    t.D1 = s.D1 + s.C.transpose() * QbA;
    t.D2 = s.D2 + s.C.transpose() * QbB;
    t.A = s.A;
    t.B = s.B;
    t.C = s.C;

    Eigen::SelfAdjointEigenSolver<Mat> es(t.R);
    const Vec& ev = es.eigenvalues();
    const double lmin = ev.minCoeff();
    if (ev.cwiseAbs().minCoeff() < 1e-12) throw NonInvertibleRtilde(k, lmin);
    if (delta > 0.0 && lmin < 0.0) throw NotPositiveDefinite(k, lmin);
    Mat X;  // R~^{-1} S~
    if (lmin > 0.0) {
      X = Eigen::LLT<Mat>(t.R).solve(t.S);
    } else {
      X = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * t.S);
    }
    t.Q = symmetrized(t.S.transpose() * X) + delta * I;
    Qbar[i] = symmetrized(Qhat - t.Q);
    out[i] = std::move(t);
  }
  return ConvexifiedQdp{delta, QdpProblem(d, std::move(out), delta * I), std::move(Qbar), delta == 0.0, {}};
}

}  // namespace

ConvexifiedQdp convexify(const QdpProblem& qdp, double delta, std::optional<double> gamma) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be finite and >= 0");
  ConvexifiedQdp conv = run(qdp, delta);
  if (conv.semidefinite) conv.warnings.emplace_back("delta = 0: convexified stage Hessians are only positive semi-definite");
  if (gamma && delta >= *gamma) {
    std::ostringstream os;
    os << "delta = " << delta << " >= gamma = " << *gamma << ": outside the sufficient interval (0, gamma)";
    conv.warnings.push_back(os.str());
  }
  return conv;
}

double select_delta_from_gamma(double gamma, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("delta fraction must lie in (0, 1)");
  if (!(gamma > 0.0)) throw SoscFailed(gamma);
  return fraction * gamma;
}

double select_delta(const QdpProblem& qdp, double fraction) {
  return select_delta_from_gamma(reduced_hessian_gamma(qdp), fraction);
}

QdpProblem shifted_problem(const QdpProblem& qdp, double delta) { return with_state_shift(qdp, -delta); }

double eval_convexified_objective(const ConvexifiedQdp& conv, const PerturbationDirection& l, const Trajectory& w) {
  double total = eval_qdp_objective(conv.problem, l, w);
  for (int k = 0; k < conv.problem.horizon(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Vec Cl = conv.problem.stage(k).C * l.stages[i];
    total += Cl.dot(conv.Qbar[i + 1] * Cl);
  }
  return total;
}

EquivalenceReport verify_equivalence(const QdpProblem& qdp, const ConvexifiedQdp& conv, const PerturbationDirection& l) {
  if (!(qdp.dims() == conv.dims())) throw ShapeError("original and convexified problems differ in dimensions");
  EquivalenceReport r;
  r.original = dense_kkt_solve(qdp, l).w;
  r.convexified = forward_solve(backward_pass(conv.problem), conv.problem, l);
  const Vec wo = r.original.stacked();
  const Vec wc = r.convexified.stacked();
  r.primal_gap = (wo - wc).cwiseAbs().maxCoeff() / std::max(1.0, wo.cwiseAbs().maxCoeff());
  r.objective_original = eval_qdp_objective(qdp, l, r.original);
  r.objective_convexified = eval_convexified_objective(conv, l, r.convexified);
  r.offset = r.objective_convexified - r.objective_original;
  r.expected_offset = 0.0 - l.l_minus1.dot(conv.Qbar.front() * l.l_minus1);
  r.offset_error = std::abs(r.offset - r.expected_offset) /
                   std::max({1.0, std::abs(r.expected_offset), std::abs(r.objective_original)});
  return r;
}

}  // namespace dpsens

#include "dpsens/verify.hpp"

#include "dpsens/errors.hpp"
#include "dpsens/nullspace.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace dpsens {

std::pair<Vec, Vec> solve_saddle_point(const Mat& H2, const Mat& G, const Vec& r1, const Vec& r2) {
  const Eigen::Index nz = H2.rows(), nc = G.rows();
  Mat K = Mat::Zero(nz + nc, nz + nc);
  K.topLeftCorner(nz, nz) = H2;
  K.topRightCorner(nz, nc) = G.transpose();
  K.bottomLeftCorner(nc, nz) = G;
  Vec rhs(nz + nc);
  rhs << r1, r2;
  Eigen::PartialPivLU<Mat> lu(K);
  // rcond() can miss exactly zero pivots, so the pivot ratio is checked as well.
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = std::min(lu.rcond(), pivots.minCoeff() / std::max(pivots.maxCoeff(), 1e-300));
  if (!(rcond > 1e-14)) {
    throw SingularKkt("KKT matrix is numerically singular (rcond " + std::to_string(rcond) + ")");
  }
  Vec sol = lu.solve(rhs);
  sol += lu.solve(Vec(rhs - K * sol));
  if (!all_finite(sol)) throw SingularKkt("KKT solve produced non-finite values");
  return {sol.head(nz), sol.tail(nc)};
}

KktSolution dense_kkt_solve(const QdpProblem& qdp, const PerturbationDirection& l) {
  const auto& d = qdp.dims();
  const Mat H = dense_hessian(qdp);
  const auto cs = assemble_constraints(qdp, l);
  const Vec g = lifted_linear_term(qdp, l);
  auto [w, lambda] = solve_saddle_point(2.0 * H, cs.G, -2.0 * g, cs.y);
  KktSolution out;
  out.stationarity = (2.0 * H * w + 2.0 * g + cs.G.transpose() * lambda).cwiseAbs().maxCoeff();
  out.feasibility = (cs.G * w - cs.y).cwiseAbs().maxCoeff();
  out.w = Trajectory::from_stacked(d, w);
  out.multipliers = std::move(lambda);
  return out;
}

namespace {

struct NewtonState {
  Mat G;
  Vec grad;
  Vec c;
};

NewtonState evaluate(const NldpModel& m, const Trajectory& w, const Vec& d) {
  std::vector<Mat> A, B;
  for (int k = 0; k < m.dims.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Mat J = stage_jacobian(m, k, w.p[i], w.q[i], reference_block(m.dims, d, k));
    A.push_back(J.leftCols(m.dims.nx));
    B.push_back(J.middleCols(m.dims.nx, m.dims.nu));
  }
  return {constraint_jacobian(m.dims, A, B), nldp_objective_gradient(m, w, d), nldp_constraints(m, w, d)};
}

double kkt_residual(const NewtonState& s, const Vec& lambda) {
  const double stat = (s.grad + s.G.transpose() * lambda).cwiseAbs().maxCoeff();
  return std::max(stat, s.c.cwiseAbs().maxCoeff());
}

}  // namespace

NewtonResult newton_equality_solve(const NldpModel& m, const Vec& d, const Trajectory& init,
                                   const NewtonOptions& opts) {
  m.dims.validate();
  init.check(m.dims);
  if (d.size() != m.dims.nl()) throw ShapeError("reference vector must have length nx + N nd");
  Trajectory w = init;
  NewtonState st = evaluate(m, w, d);
  Vec lambda = st.G.transpose().colPivHouseholderQr().solve(Vec(-st.grad));
  double residual = kkt_residual(st, lambda);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const QdpProblem lin = linearize(m, w, d, lambda);
    Mat H = dense_hessian(lin);
    if (reduced_hessian_gamma(H, st.G) <= 0.0) {
      H.diagonal().array() += 1e-3 * (1.0 + lin.max_block_norm());
    }
    const auto [dz, lambda_new] = solve_saddle_point(H, st.G, -st.grad, -st.c);
    w = Trajectory::from_stacked(m.dims, Vec(w.stacked() + dz));
    lambda = lambda_new;
    st = evaluate(m, w, d);
    residual = kkt_residual(st, lambda);
    if (!std::isfinite(residual)) throw SolverDiverged(it, residual);
    if (residual <= opts.tolerance) return NewtonResult{w, lambda, it, residual};
  }
  throw SolverDiverged(opts.max_iterations, residual);
}

namespace {

double relative_error(const Mat& analytic, const Mat& approx) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
      const double a = analytic(i, j);
      e = std::max(e, std::abs(a - approx(i, j)) / std::max(1.0, std::abs(a)));
    }
  }
  return e;
}

}  // namespace

HessianCheckReport finite_diff_hessian_check(const NldpModel& m, double threshold) {
  m.validate();
  const auto& dm = m.dims;
  const int nx = dm.nx, nu = dm.nu, nd = dm.nd;
  const Vec lambda = m.multipliers ? *m.multipliers : recover_multipliers(m, m.base, m.d0);
  // Analytic evaluators are used where present; the comparison is against a
  // model stripped of its second-order evaluators so every block is re-derived.
  const QdpProblem analytic = linearize(m, m.base, m.d0, lambda);
  NldpModel stripped = m;
  stripped.stage_lagrangian_hessian = nullptr;
  stripped.terminal_hessian = nullptr;
  stripped.dynamics_jacobian = nullptr;

  HessianCheckReport rep;
  rep.threshold = threshold;
  auto record = [&](const char* name, int k, const Mat& a, const Mat& b) {
    BlockError e{name, k, relative_error(a, b)};
    if (rep.blocks.empty() || e.error > rep.worst.error) rep.worst = e;
    rep.blocks.push_back(e);
  };
  for (int k = 0; k < dm.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Vec dk = reference_block(dm, m.d0, k);
    const Vec& x = m.base.p[i];
    const Vec& u = m.base.q[i];
    const Vec lam = lambda.segment((k + 1) * nx, nx);
    Mat Hfd;
    if (m.stage_cost_gradient) {
      Vec v(nx + nu + nd);
      v << x, u, dk;
      Hfd = fd::hessian_from_gradient(
          [&](const Vec& z) {
            const Vec zx = z.head(nx), zu = z.segment(nx, nu), zd = z.tail(nd);
            return Vec(m.stage_cost_gradient(k, zx, zu, zd) - stage_jacobian(stripped, k, zx, zu, zd).transpose() * lam);
          },
          v);
    } else {
      Hfd = stage_hessian(stripped, k, x, u, dk, lam);
    }
    const Mat Jfd = stage_jacobian(stripped, k, x, u, dk);
    const auto& s = analytic.stage(k);
    record("Q", k, s.Q, Hfd.block(0, 0, nx, nx));
    record("S", k, s.S, Hfd.block(nx, 0, nu, nx));
    record("R", k, s.R, Hfd.block(nx, nx, nu, nu));
    record("D1", k, s.D1, Hfd.block(nx + nu, 0, nd, nx));
    record("D2", k, s.D2, Hfd.block(nx + nu, nx, nd, nu));
    record("A", k, s.A, Jfd.leftCols(nx));
    record("B", k, s.B, Jfd.middleCols(nx, nu));
    record("C", k, s.C, Jfd.rightCols(nd));
  }
  record("Q_N", dm.N, analytic.terminal_Q(), terminal_hessian(stripped, m.base.p.back()));
  return rep;
}

}  // namespace dpsens

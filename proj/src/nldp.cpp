#include "dpsens/nldp.hpp"

#include "dpsens/errors.hpp"
#include "dpsens/finite_diff.hpp"
#include "dpsens/nullspace.hpp"

#include <string>

namespace dpsens {
namespace {

Vec stack3(const Vec& x, const Vec& u, const Vec& d) {
  Vec v(x.size() + u.size() + d.size());
  v << x, u, d;
  return v;
}

struct StageSplit {
  Vec x, u, d;
};

StageSplit split3(const Dims& dims, const Vec& v) {
  return {v.head(dims.nx), v.segment(dims.nx, dims.nu), v.tail(dims.nd)};
}

void require_finite(const Mat& m, const std::string& what, int k) {
  if (!m.allFinite()) throw ValidationError(what + " at stage " + std::to_string(k) + " is not finite");
}

void require_shape(const Mat& m, Eigen::Index r, Eigen::Index c, const std::string& what, int k) {
  if (m.rows() != r || m.cols() != c) {
    throw ShapeError(what + " at stage " + std::to_string(k) + " has shape " + std::to_string(m.rows()) +
                     "x" + std::to_string(m.cols()) + ", expected " + std::to_string(r) + "x" +
                     std::to_string(c));
  }
  require_finite(m, what, k);
}

}  // namespace

void NldpModel::validate() const {
  dims.validate();
  if (!stage_cost || !terminal_cost || !dynamics) {
    throw ValidationError("NLDP model needs stage_cost, terminal_cost and dynamics");
  }
  if (d0.size() != dims.nl()) throw ShapeError("reference d0 must have length nx + N nd");
  base.check(dims);
  if (multipliers && multipliers->size() != dims.nc()) {
    throw ShapeError("multipliers must have length (N+1) nx");
  }
}

Vec reference_block(const Dims& dims, const Vec& d, int k) {
  if (d.size() != dims.nl()) throw ShapeError("reference vector must have length nx + N nd");
  if (k < -1 || k >= dims.N) throw ValidationError("reference stage out of range");
  if (k == -1) return d.head(dims.nx);
  return d.segment(dims.nx + k * dims.nd, dims.nd);
}

Vec stage_gradient(const NldpModel& m, int k, const Vec& x, const Vec& u, const Vec& d) {
  const int n = m.dims.nx + m.dims.nu + m.dims.nd;
  Vec g;
  if (m.stage_cost_gradient) {
    g = m.stage_cost_gradient(k, x, u, d);
  } else {
    g = fd::gradient(
        [&](const Vec& v) {
          const auto s = split3(m.dims, v);
          return m.stage_cost(k, s.x, s.u, s.d);
        },
        stack3(x, u, d));
  }
  require_shape(g, n, 1, "stage cost gradient", k);
  return g;
}

Mat stage_jacobian(const NldpModel& m, int k, const Vec& x, const Vec& u, const Vec& d) {
  const int n = m.dims.nx + m.dims.nu + m.dims.nd;
  Mat J;
  if (m.dynamics_jacobian) {
    J = m.dynamics_jacobian(k, x, u, d);
  } else {
    J = fd::jacobian(
        [&](const Vec& v) {
          const auto s = split3(m.dims, v);
          return m.dynamics(k, s.x, s.u, s.d);
        },
        stack3(x, u, d));
  }
  require_shape(J, m.dims.nx, n, "dynamics Jacobian", k);
  return J;
}

Mat stage_hessian(const NldpModel& m, int k, const Vec& x, const Vec& u, const Vec& d, const Vec& lambda_k) {
  const int n = m.dims.nx + m.dims.nu + m.dims.nd;
  Mat H;
  if (m.stage_lagrangian_hessian) {
    H = m.stage_lagrangian_hessian(k, x, u, d, lambda_k);
  } else if (m.stage_cost_gradient && m.dynamics_jacobian) {
    H = fd::hessian_from_gradient(
        [&](const Vec& v) {
          const auto s = split3(m.dims, v);
          return Vec(m.stage_cost_gradient(k, s.x, s.u, s.d) -
                     m.dynamics_jacobian(k, s.x, s.u, s.d).transpose() * lambda_k);
        },
        stack3(x, u, d));
  } else {
    H = fd::hessian(
        [&](const Vec& v) {
          const auto s = split3(m.dims, v);
          return m.stage_cost(k, s.x, s.u, s.d) - lambda_k.dot(m.dynamics(k, s.x, s.u, s.d));
        },
        stack3(x, u, d));
  }
  require_shape(H, n, n, "Lagrangian Hessian", k);
  return H;
}

Vec terminal_gradient(const NldpModel& m, const Vec& x) {
  Vec g = m.terminal_gradient ? m.terminal_gradient(x) : fd::gradient(m.terminal_cost, x);
  require_shape(g, m.dims.nx, 1, "terminal gradient", m.dims.N);
  return g;
}

Mat terminal_hessian(const NldpModel& m, const Vec& x) {
  Mat H;
  if (m.terminal_hessian) {
    H = m.terminal_hessian(x);
  } else if (m.terminal_gradient) {
    H = fd::hessian_from_gradient(m.terminal_gradient, x);
  } else {
    H = fd::hessian(m.terminal_cost, x);
  }
  require_shape(H, m.dims.nx, m.dims.nx, "terminal Hessian", m.dims.N);
  return H;
}

double nldp_objective(const NldpModel& m, const Trajectory& w, const Vec& d) {
  w.check(m.dims);
  double total = m.terminal_cost(w.p.back());
  for (int k = 0; k < m.dims.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    total += m.stage_cost(k, w.p[i], w.q[i], reference_block(m.dims, d, k));
  }
  return total;
}

Vec nldp_constraints(const NldpModel& m, const Trajectory& w, const Vec& d) {
  w.check(m.dims);
  const int nx = m.dims.nx;
  Vec c(m.dims.nc());
  c.head(nx) = w.p[0] - reference_block(m.dims, d, -1);
  for (int k = 0; k < m.dims.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Vec fk = m.dynamics(k, w.p[i], w.q[i], reference_block(m.dims, d, k));
    require_shape(fk, nx, 1, "dynamics", k);
    c.segment((k + 1) * nx, nx) = w.p[i + 1] - fk;
  }
  return c;
}

Vec nldp_objective_gradient(const NldpModel& m, const Trajectory& w, const Vec& d) {
  w.check(m.dims);
  const auto& dm = m.dims;
  Vec g(dm.nz());
  for (int k = 0; k < dm.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Vec gk = stage_gradient(m, k, w.p[i], w.q[i], reference_block(dm, d, k));
    g.segment(dm.state_offset(k), dm.nx + dm.nu) = gk.head(dm.nx + dm.nu);
  }
  g.segment(dm.state_offset(dm.N), dm.nx) = terminal_gradient(m, w.p.back());
  return g;
}

namespace {

Mat jacobian_at(const NldpModel& m, const Trajectory& w, const Vec& d) {
  std::vector<Mat> A, B;
  for (int k = 0; k < m.dims.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Mat J = stage_jacobian(m, k, w.p[i], w.q[i], reference_block(m.dims, d, k));
    A.push_back(J.leftCols(m.dims.nx));
    B.push_back(J.middleCols(m.dims.nx, m.dims.nu));
  }
  return constraint_jacobian(m.dims, A, B);
}

}  // namespace

Vec recover_multipliers(const NldpModel& m, const Trajectory& w, const Vec& d) {
  const Mat G = jacobian_at(m, w, d);
  const Vec grad = nldp_objective_gradient(m, w, d);
  const Mat Gt = G.transpose();
  const Vec lambda = Gt.colPivHouseholderQr().solve(Vec(-grad));
  const double residual = (grad + Gt * lambda).cwiseAbs().maxCoeff();
  if (residual > 1e-6) {
    throw ValidationError("base point is not stationary: multiplier least-squares residual " +
                          std::to_string(residual));
  }
  return lambda;
}

QdpProblem linearize(const NldpModel& m, const Trajectory& w, const Vec& d, const Vec& lambda) {
  const auto& dm = m.dims;
  w.check(dm);
  if (lambda.size() != dm.nc()) throw ShapeError("multipliers must have length (N+1) nx");
  const int nx = dm.nx, nu = dm.nu, nd = dm.nd;
  std::vector<StageBlocks> stages;
  stages.reserve(static_cast<std::size_t>(dm.N));
  for (int k = 0; k < dm.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Vec dk = reference_block(dm, d, k);
    // lambda_k multiplies x_{k+1} - f_k, i.e. block k + 1 of the stacked vector.
    const Vec lam = lambda.segment((k + 1) * nx, nx);
    const Mat H = stage_hessian(m, k, w.p[i], w.q[i], dk, lam);
    const Mat J = stage_jacobian(m, k, w.p[i], w.q[i], dk);
    StageBlocks s;
    s.Q = H.block(0, 0, nx, nx);
    s.S = H.block(nx, 0, nu, nx);
    s.R = H.block(nx, nx, nu, nu);
    s.D1 = H.block(nx + nu, 0, nd, nx);
    s.D2 = H.block(nx + nu, nx, nd, nu);
    s.A = J.leftCols(nx);
    s.B = J.middleCols(nx, nu);
    s.C = J.rightCols(nd);
    stages.push_back(std::move(s));
  }
  return QdpProblem(dm, std::move(stages), terminal_hessian(m, w.p.back()));
}

QdpProblem assemble_qdp_from_nldp(const NldpModel& m) {
  m.validate();
  const Vec lambda = m.multipliers ? *m.multipliers : recover_multipliers(m, m.base, m.d0);
  return linearize(m, m.base, m.d0, lambda);
}

}  // namespace dpsens

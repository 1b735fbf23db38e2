#include "dpsens/model.hpp"

#include "dpsens/errors.hpp"

#include <algorithm>
#include <string>

namespace dpsens {
namespace {

void expect_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const char* name, int k) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(name) + " at stage " + std::to_string(k) + " has shape " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!m.allFinite()) {
    throw ValidationError(std::string(name) + " at stage " + std::to_string(k) + " has non-finite entries");
  }
}

Mat checked_symmetric(const Mat& m, const char* name, int k) {
  const double scale = std::max(1.0, max_abs(m));
  if (asymmetry(m) > QdpProblem::kSymmetryTolerance * scale) {
    throw ValidationError(std::string(name) + " at stage " + std::to_string(k) +
                          " is not symmetric (max asymmetry " + std::to_string(asymmetry(m)) + ")");
  }
  return symmetrized(m);
}

}  // namespace

void Dims::validate() const {
  if (N < 1) throw ValidationError("horizon N must be >= 1");
  if (nx < 1 || nu < 1 || nd < 1) throw ValidationError("nx, nu, nd must all be >= 1");
}

QdpProblem::QdpProblem(Dims dims, std::vector<StageBlocks> stages, Mat terminal_Q)
    : dims_(dims), stages_(std::move(stages)), terminal_Q_(std::move(terminal_Q)) {
  dims_.validate();
  if (static_cast<int>(stages_.size()) != dims_.N) {
    throw ShapeError("expected " + std::to_string(dims_.N) + " stages, got " + std::to_string(stages_.size()));
  }
  const auto [N, nx, nu, nd] = dims_;
  for (int k = 0; k < N; ++k) {
    auto& s = stages_[static_cast<std::size_t>(k)];
    expect_shape(s.Q, nx, nx, "Q", k);
    expect_shape(s.R, nu, nu, "R", k);
    expect_shape(s.S, nu, nx, "S", k);
    expect_shape(s.D1, nd, nx, "D1", k);
    expect_shape(s.D2, nd, nu, "D2", k);
    expect_shape(s.A, nx, nx, "A", k);
    expect_shape(s.B, nx, nu, "B", k);
    expect_shape(s.C, nx, nd, "C", k);
    s.Q = checked_symmetric(s.Q, "Q", k);
    s.R = checked_symmetric(s.R, "R", k);
  }
  expect_shape(terminal_Q_, nx, nx, "terminal_Q", N);
  terminal_Q_ = checked_symmetric(terminal_Q_, "terminal_Q", N);
}

Mat QdpProblem::stage_hessian(int k) const {
  const auto& s = stage(k);
  const int nx = dims_.nx, nu = dims_.nu;
  Mat h(nx + nu, nx + nu);
  h.topLeftCorner(nx, nx) = s.Q;
  h.topRightCorner(nx, nu) = s.S.transpose();
  h.bottomLeftCorner(nu, nx) = s.S;
  h.bottomRightCorner(nu, nu) = s.R;
  return h;
}

double QdpProblem::max_block_norm() const {
  double m = op_norm(terminal_Q_);
  for (const auto& s : stages_) {
    for (const Mat* b : {&s.Q, &s.R, &s.S, &s.D1, &s.D2, &s.A, &s.B, &s.C}) {
      m = std::max(m, op_norm(*b));
    }
  }
  return m;
}

PerturbationDirection PerturbationDirection::zero(const Dims& dims) {
  PerturbationDirection l;
  l.l_minus1 = Vec::Zero(dims.nx);
  l.stages.assign(static_cast<std::size_t>(dims.N), Vec::Zero(dims.nd));
  return l;
}

PerturbationDirection PerturbationDirection::from_stacked(const Dims& dims, const Vec& v) {
  if (v.size() != dims.nl()) throw ShapeError("perturbation vector has wrong length");
  PerturbationDirection l = zero(dims);
  l.l_minus1 = v.head(dims.nx);
  for (int k = 0; k < dims.N; ++k) l.stages[static_cast<std::size_t>(k)] = v.segment(dims.nx + k * dims.nd, dims.nd);
  return l;
}

Vec PerturbationDirection::stacked() const {
  const Eigen::Index nd = stages.empty() ? 0 : stages.front().size();
  Vec v(l_minus1.size() + static_cast<Eigen::Index>(stages.size()) * nd);
  v.head(l_minus1.size()) = l_minus1;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    v.segment(l_minus1.size() + static_cast<Eigen::Index>(k) * nd, nd) = stages[k];
  }
  return v;
}

std::vector<int> PerturbationDirection::support() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (stages[k].squaredNorm() > 0.0) out.push_back(static_cast<int>(k));
  }
  return out;
}

void PerturbationDirection::check(const Dims& dims) const {
  if (l_minus1.size() != dims.nx || static_cast<int>(stages.size()) != dims.N) {
    throw ShapeError("perturbation direction does not match problem dimensions");
  }
  for (const auto& s : stages) {
    if (s.size() != dims.nd) throw ShapeError("perturbation stage block has wrong length");
  }
}

Trajectory Trajectory::zero(const Dims& dims) {
  Trajectory t;
  t.p.assign(static_cast<std::size_t>(dims.N + 1), Vec::Zero(dims.nx));
  t.q.assign(static_cast<std::size_t>(dims.N), Vec::Zero(dims.nu));
  return t;
}

Trajectory Trajectory::from_stacked(const Dims& dims, const Vec& w) {
  if (w.size() != dims.nz()) throw ShapeError("stacked trajectory has wrong length");
  Trajectory t = zero(dims);
  for (int k = 0; k <= dims.N; ++k) {
    t.p[static_cast<std::size_t>(k)] = w.segment(dims.state_offset(k), dims.nx);
    if (k < dims.N) t.q[static_cast<std::size_t>(k)] = w.segment(dims.control_offset(k), dims.nu);
  }
  return t;
}

Vec Trajectory::stacked() const {
  const Eigen::Index nx = p.empty() ? 0 : p.front().size();
  const Eigen::Index nu = q.empty() ? 0 : q.front().size();
  Vec w(static_cast<Eigen::Index>(p.size()) * nx + static_cast<Eigen::Index>(q.size()) * nu);
  Eigen::Index off = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    w.segment(off, nx) = p[k];
    off += nx;
    if (k < q.size()) {
      w.segment(off, nu) = q[k];
      off += nu;
    }
  }
  return w;
}

void Trajectory::check(const Dims& dims) const {
  if (static_cast<int>(p.size()) != dims.N + 1 || static_cast<int>(q.size()) != dims.N) {
    throw ShapeError("trajectory length does not match horizon");
  }
  for (const auto& v : p) {
    if (v.size() != dims.nx) throw ShapeError("state block has wrong length");
  }
  for (const auto& v : q) {
    if (v.size() != dims.nu) throw ShapeError("control block has wrong length");
  }
}

Mat dense_hessian(const QdpProblem& qdp) {
  const auto& d = qdp.dims();
  Mat h = Mat::Zero(d.nz(), d.nz());
  for (int k = 0; k < d.N; ++k) {
    h.block(d.state_offset(k), d.state_offset(k), d.nx + d.nu, d.nx + d.nu) = qdp.stage_hessian(k);
  }
  h.block(d.state_offset(d.N), d.state_offset(d.N), d.nx, d.nx) = qdp.terminal_Q();
  return h;
}

Vec lifted_linear_term(const QdpProblem& qdp, const PerturbationDirection& l) {
  const auto& d = qdp.dims();
  l.check(d);
  Vec g = Vec::Zero(d.nz());
  for (int k = 0; k < d.N; ++k) {
    const auto& s = qdp.stage(k);
    const Vec& lk = l.stages[static_cast<std::size_t>(k)];
    g.segment(d.state_offset(k), d.nx) = s.D1.transpose() * lk;
    g.segment(d.control_offset(k), d.nu) = s.D2.transpose() * lk;
  }
  return g;
}

double eval_qdp_objective(const QdpProblem& qdp, const PerturbationDirection& l, const Trajectory& w) {
  const auto& d = qdp.dims();
  l.check(d);
  w.check(d);
  double total = 0.0;
  for (int k = 0; k < d.N; ++k) {
    const auto& s = qdp.stage(k);
    const auto i = static_cast<std::size_t>(k);
    const Vec& p = w.p[i];
    const Vec& q = w.q[i];
    const Vec& lk = l.stages[i];
    total += p.dot(s.Q * p) + q.dot(s.R * q) + 2.0 * q.dot(s.S * p) +
             2.0 * lk.dot(s.D1 * p + s.D2 * q);
  }
  const Vec& pN = w.p.back();
  total += pN.dot(qdp.terminal_Q() * pN);
  return total;
}

Trajectory rollout_dynamics(const QdpProblem& qdp, const PerturbationDirection& l,
                            const std::vector<Vec>& controls) {
  const auto& d = qdp.dims();
  l.check(d);
  if (static_cast<int>(controls.size()) != d.N) throw ShapeError("rollout needs exactly N controls");
  Trajectory t;
  t.q = controls;
  t.p.reserve(static_cast<std::size_t>(d.N + 1));
  t.p.push_back(l.l_minus1);
  for (int k = 0; k < d.N; ++k) {
    const auto& s = qdp.stage(k);
    const auto i = static_cast<std::size_t>(k);
    if (controls[i].size() != d.nu) throw ShapeError("control block has wrong length");
    t.p.push_back(s.A * t.p[i] + s.B * controls[i] + s.C * l.stages[i]);
  }
  return t;
}

QdpProblem with_state_shift(const QdpProblem& qdp, double shift) {
  std::vector<StageBlocks> st = qdp.stages();
  const int nx = qdp.dims().nx;
  for (auto& s : st) s.Q += shift * identity(nx);
  return QdpProblem(qdp.dims(), std::move(st), qdp.terminal_Q() + shift * identity(nx));
}

}  // namespace dpsens

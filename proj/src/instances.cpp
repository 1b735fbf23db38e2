#include "dpsens/instances.hpp"

#include "dpsens/errors.hpp"
#include "dpsens/nullspace.hpp"

#include <cmath>

namespace dpsens {
namespace {

Mat uniform(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

double uniform1(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng); }

}  // namespace

QdpProblem random_sosc_instance(std::mt19937_64& rng, const RandomInstanceOptions& opts) {
  const Dims dims{opts.N, opts.nx, opts.nu, opts.nd};
  dims.validate();
  if (!(opts.gamma0 > 0.0)) throw ValidationError("gamma0 must be positive");
  const int nx = dims.nx, nu = dims.nu, nd = dims.nd;
  std::vector<StageBlocks> stages;
  std::vector<Mat> Qnoise;
  std::vector<double> beta, mmin;
  for (int k = 0; k < dims.N; ++k) {
    StageBlocks s;
    s.A = uniform(rng, nx, nx);
    s.B = uniform(rng, nx, nu);
    s.C = uniform(rng, nx, nd);
    const Mat M0 = uniform(rng, nu, nu);
    const Mat M = M0 * M0.transpose() / nu + 0.5 * identity(nu);
    const double bnorm = op_norm(s.B);
    const double b = 2.0 * max_eig(M) / std::max(bnorm * bnorm, 1e-3);
    s.R = symmetrized(M - b * s.B.transpose() * s.B);
    s.S = uniform(rng, nu, nx);
    s.D1 = uniform(rng, nd, nx);
    s.D2 = uniform(rng, nd, nu);
    Qnoise.push_back(symmetrized(uniform(rng, nx, nx)));
    beta.push_back(b);
    mmin.push_back(min_eig(M));
    stages.push_back(std::move(s));
  }
  const Mat QNnoise = symmetrized(uniform(rng, nx, nx));

  std::vector<Mat> As, Bs;
  for (const auto& s : stages) {
    As.push_back(s.A);
    Bs.push_back(s.B);
  }
  const Mat G = constraint_jacobian(dims, As, Bs);
  double scale = 1.0;
  for (int attempt = 0; attempt < 80; ++attempt) {
    for (int k = 0; k < dims.N; ++k) {
      const auto i = static_cast<std::size_t>(k);
      auto& s = stages[i];
      const double bprev = k > 0 ? beta[i - 1] : 0.0;
      const double an = op_norm(s.A);
      const double sn = op_norm(s.S);
      const double a = 2.0 * bprev + 2.0 * beta[i] * an * an + 2.0 * sn * sn / mmin[i] + op_norm(Qnoise[i]) + opts.gamma0;
      s.Q = Qnoise[i] + scale * a * identity(nx);
    }
    const Mat QN = QNnoise + scale * (2.0 * beta.back() + op_norm(QNnoise) + opts.gamma0) * identity(nx);
    QdpProblem qdp(dims, stages, QN);
    if (reduced_hessian_gamma(dense_hessian(qdp), G) >= 0.999 * opts.gamma0) return qdp;
    scale *= 1.5;
  }
  throw ValidationError("random instance generator failed to reach the target gamma");
}

QdpProblem tridiagonal_instance(int N, double gamma0, std::uint64_t seed) {
  const Dims dims{N, 1, 1, 1};
  dims.validate();
  if (!(gamma0 > 0.0)) throw ValidationError("gamma0 must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> b(static_cast<std::size_t>(N));
  std::vector<StageBlocks> stages(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    b[i] = uniform1(rng);
    auto& s = stages[i];
    s.A = Mat::Ones(1, 1);
    s.B = Mat::Ones(1, 1);
    s.S = Mat::Zero(1, 1);
    s.R = Mat::Constant(1, 1, b[i]);
    s.C = Mat::Constant(1, 1, uniform1(rng));
    s.D1 = Mat::Constant(1, 1, uniform1(rng));
    s.D2 = Mat::Constant(1, 1, uniform1(rng));
  }
  for (int k = 0; k < N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double bprev = k > 0 ? std::abs(b[i - 1]) : 0.0;
    stages[i].Q = Mat::Constant(1, 1, 2.0 * std::abs(b[i]) + 2.0 * bprev + 5.0 * gamma0);
  }
  const Mat QN = Mat::Constant(1, 1, 2.0 * std::abs(b.back()) + 5.0 * gamma0);
  return QdpProblem(dims, std::move(stages), QN);
}

NldpModel benchmark_model(int N, double mu1, double mu2, BenchmarkDynamics kind) {
  if (!(mu1 > mu2 && mu2 > 0.0)) throw ValidationError("need mu1 > mu2 > 0");
  const bool exp_dyn = kind == BenchmarkDynamics::Exp;
  NldpModel m;
  m.dims = Dims{N, 1, 1, 1};
  m.dims.validate();
  auto f = [exp_dyn](double v) { return exp_dyn ? std::expm1(v) : v; };
  auto fp = [exp_dyn](double v) { return exp_dyn ? std::exp(v) : 1.0; };
  auto fpp = [exp_dyn](double v) { return exp_dyn ? std::exp(v) : 0.0; };

  m.stage_cost = [=](int, const Vec& x, const Vec& u, const Vec& d) {
    const double eu = u[0] - d[0], ex = x[0] - d[0];
    return mu1 * eu * eu - mu2 * ex * ex;
  };
  m.terminal_cost = [=](const Vec& x) { return -mu2 * x[0] * x[0]; };
  m.dynamics = [=](int, const Vec&, const Vec& u, const Vec& d) { return Vec::Constant(1, u[0] + f(d[0])); };

  m.stage_cost_gradient = [=](int, const Vec& x, const Vec& u, const Vec& d) {
    const double eu = u[0] - d[0], ex = x[0] - d[0];
    Vec g(3);
    g << -2.0 * mu2 * ex, 2.0 * mu1 * eu, -2.0 * mu1 * eu + 2.0 * mu2 * ex;
    return g;
  };
  m.terminal_gradient = [=](const Vec& x) { return Vec::Constant(1, -2.0 * mu2 * x[0]); };
  m.dynamics_jacobian = [=](int, const Vec&, const Vec&, const Vec& d) {
    Mat J(1, 3);
    J << 0.0, 1.0, fp(d[0]);
    return J;
  };
  m.stage_lagrangian_hessian = [=](int, const Vec&, const Vec&, const Vec& d, const Vec& lambda) {
    Mat H(3, 3);
    H << -2.0 * mu2, 0.0, 2.0 * mu2,
         0.0, 2.0 * mu1, -2.0 * mu1,
         2.0 * mu2, -2.0 * mu1, 2.0 * (mu1 - mu2) - lambda[0] * fpp(d[0]);
    return H;
  };
  m.terminal_hessian = [=](const Vec&) { return Mat::Constant(1, 1, -2.0 * mu2); };

  m.d0 = Vec::Zero(m.dims.nl());
  m.base = Trajectory::zero(m.dims);
  m.multipliers = Vec::Zero(m.dims.nc());
  return m;
}

QdpProblem benchmark_qdp(int N, double mu1, double mu2, BenchmarkDynamics kind) {
  return assemble_qdp_from_nldp(benchmark_model(N, mu1, mu2, kind));
}

}  // namespace dpsens

#include "dpsens/sensitivity.hpp"

#include "dpsens/errors.hpp"
#include "dpsens/nullspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dpsens {

PerturbationDirection unit_direction(const Dims& dims, int i, int j) {
  dims.validate();
  if (i < -1 || i >= dims.N) throw ValidationError("source stage " + std::to_string(i) + " out of range");
  const int size = i == -1 ? dims.nx : dims.nd;
  if (j < 0 || j >= size) throw ValidationError("coordinate " + std::to_string(j) + " out of range");
  auto l = PerturbationDirection::zero(dims);
  if (i == -1) {
    l.l_minus1[j] = 1.0;
  } else {
    l.stages[static_cast<std::size_t>(i)][j] = 1.0;
  }
  l.stage = i;
  return l;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("fit_line needs equally long inputs");
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) throw InsufficientData("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw InsufficientData("line fit needs at least two distinct abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.points = static_cast<int>(x.size());
  return f;
}

DecayFit fit_decay_rate(const std::vector<double>& norms, int i, double floor) {
  const int center = std::max(i, 0);
  std::vector<double> x, y;
  int left = 0, right = 0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const int kk = static_cast<int>(k);
    if (!(norms[k] > floor)) continue;
    if (i >= 0 && kk < center) ++left;
    if (i < 0 || kk > center) ++right;
    x.push_back(std::abs(kk - center));
    y.push_back(std::log(norms[k]));
  }
  if (left < 3 && right < 3) {
    throw InsufficientData("decay fit needs at least 3 stages above the floor on one side of the source");
  }
  const LinearFit f = fit_line(x, y);
  return DecayFit{std::exp(f.slope), f.intercept, f.r_squared, f.points};
}

std::vector<double> SensitivityResult::stage_norms() const {
  std::vector<double> out(norm_p.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(norm_p[k], norm_q[k]);
  return out;
}

SensitivitySolver::SensitivitySolver(QdpProblem qdp, double delta_fraction)
    : qdp_(std::move(qdp)),
      gamma_(reduced_hessian_gamma(qdp_)),
      conv_(convexify(qdp_, select_delta_from_gamma(gamma_, delta_fraction), gamma_)),
      rs_(backward_pass(conv_.problem)) {}

SensitivityResult SensitivitySolver::solve(const PerturbationDirection& l) const {
  SensitivityResult r;
  r.w = forward_solve(rs_, conv_.problem, l);
  r.source_stage = l.stage;
  r.gamma = gamma_;
  r.delta = conv_.delta;
  r.identity_residual = rs_.max_identity_residual();
  for (std::size_t k = 0; k < r.w.p.size(); ++k) {
    r.norm_p.push_back(r.w.p[k].norm());
    r.norm_q.push_back(k < r.w.q.size() ? r.w.q[k].norm() : 0.0);
  }
  if (l.stage) {
    try {
      r.fit = fit_decay_rate(r.stage_norms(), *l.stage);
    } catch (const InsufficientData&) {
      r.fit.reset();
    }
  }
  return r;
}

SensitivityResult solve_sensitivity(const QdpProblem& qdp, const PerturbationDirection& l, double delta_fraction) {
  return SensitivitySolver(qdp, delta_fraction).solve(l);
}

Mat controllability_matrix(const QdpProblem& qdp, int k, int t) {
  const auto& d = qdp.dims();
  if (k < 0 || t < 1 || k + t > d.N) throw ValidationError("controllability window out of range");
  Mat Xi(d.nx, t * d.nu);
  Mat prod = identity(d.nx);  // A_{k+t-1} ... A_{k+t-j}
  for (int j = 0; j < t; ++j) {
    const int s = k + t - 1 - j;
    Xi.middleCols(j * d.nu, d.nu) = prod * qdp.stage(s).B;
    prod = prod * qdp.stage(s).A;
  }
  return Xi;
}

ControllabilityReport controllability(const QdpProblem& qdp, double lambda_C, int t_max) {
  const int N = qdp.horizon();
  if (!(lambda_C > 0.0)) throw ValidationError("lambda_C must be positive");
  if (t_max < 1 || t_max > N) throw ValidationError("t_max must lie in [1, N]");
  ControllabilityReport rep;
  rep.lambda_C = lambda_C;
  rep.pass = true;
  for (int k = 0; k < N; ++k) {
    std::optional<int> found;
    double lmin = 0.0;
    for (int t = 1; t <= std::min(t_max, N - k); ++t) {
      const Mat Xi = controllability_matrix(qdp, k, t);
      lmin = min_eig(Xi * Xi.transpose());
      if (lmin >= lambda_C) {
        found = t;
        break;
      }
    }
    rep.t_k.push_back(found);
    rep.gramian_min_eig.push_back(lmin);
    if (found) {
      rep.t = std::max(rep.t, *found);
    } else {
      rep.pass = false;
    }
  }
  return rep;
}

double lambda_bcs(double beta_S, double beta_B, double beta_C) {
  if (!(beta_S > 0.0) || !(beta_C > 0.0) || !(beta_B >= 0.0)) {
    throw ValidationError("lambda_bcs needs beta_S > 0, beta_C > 0 and beta_B >= 0");
  }
  const double ratio = beta_C / (beta_C + beta_B);
  return ratio * ratio * std::min(beta_S, beta_C);
}

double BoundsReport::decay_bound(int i, int k) const {
  const int dist = i < 0 ? k : std::abs(k - i);
  return upsilon_pq * std::pow(rho, dist);
}

BoundsReport theoretical_constants(const QdpProblem& qdp, double delta, const ConstantsOptions& opts) {
  const double gamma = reduced_hessian_gamma(qdp);
  if (!(gamma > 0.0)) throw SoscFailed(gamma);
  if (!(delta > 0.0 && delta < gamma)) throw ValidationError("delta must lie in (0, gamma)");
  return theoretical_constants(qdp, convexify(qdp, delta, gamma), gamma, opts);
}

BoundsReport theoretical_constants(const QdpProblem& qdp, const ConvexifiedQdp& conv, double gamma,
                                   const ConstantsOptions& opts) {
  if (!(gamma > 0.0)) throw SoscFailed(gamma);
  const double delta = conv.delta;
  if (!(delta > 0.0 && delta < gamma)) throw ValidationError("delta must lie in (0, gamma)");
  const auto ctrl = controllability(qdp, opts.lambda_C, opts.t_max.value_or(qdp.horizon()));
  if (!ctrl.pass) throw ValidationError("uniform controllability check fails for lambda_C = " + std::to_string(opts.lambda_C));

  BoundsReport b;
  b.gamma = gamma;
  b.delta = delta;
  b.lambda_C = opts.lambda_C;
  b.t = ctrl.t;
  b.upsilon = opts.overrides.upsilon.value_or(qdp.max_block_norm());

  const double U = b.upsilon;
  const double lc = b.lambda_C;
  double psi = 0.0;
  for (int i = 1; i <= b.t; ++i) psi += std::pow(U, i);
  b.psi = psi;
  const double Ut = std::pow(U, b.t);
  double tail = 0.0;
  for (int i = 1; i <= b.t - 1; ++i) {
    const double term = std::pow(U, i) + psi * psi * Ut / lc;
    tail += term * term;
  }
  b.upsilon_Qbar = 2.0 * U * (1.0 + psi * psi * Ut * Ut / (lc * lc) + tail);

  b.upsilon_tilde = opts.overrides.upsilon_tilde.value_or(conv.upsilon_tilde());
  if (opts.overrides.upsilon_tilde_Qbar) {
    b.upsilon_tilde_Qbar = *opts.overrides.upsilon_tilde_Qbar;
  } else {
    const auto rs = backward_pass(conv.problem);
    for (const auto& K : rs.K) b.upsilon_tilde_Qbar = std::max(b.upsilon_tilde_Qbar, op_norm(K));
  }

  const double g = gamma;
  const double Uq = b.upsilon_tilde_Qbar;
  b.lambda_BCS = lambda_bcs(delta, b.upsilon_tilde, g);
  b.lambda_H = (g / (g + b.upsilon_tilde)) * (g / (g + b.upsilon_tilde)) * delta;
  b.upsilon_E = std::sqrt(Uq / b.lambda_H);
  b.rho = std::sqrt(Uq / (Uq + b.lambda_H));

  const double Y = std::max(b.upsilon, b.upsilon_tilde);
  const double rho = b.rho;
  const double UE = b.upsilon_E;
  b.upsilon_data = Y;
  b.upsilon_P = std::max((Y * Y * Uq + b.upsilon_tilde) / g, 1.0);
  const double UP = b.upsilon_P;
  b.upsilon_u = (1.0 + UP) * UE * UE * Y * Y * Y / (g * (1.0 - rho * rho)) + UE * Y * Y / (g * rho);
  b.upsilon_f = Y * Y * UE * UE * Uq * rho / (g * (1.0 - rho * rho)) + UE / rho + Y * Y * UE * Uq / (g * rho);
  b.upsilon_uf = std::max(b.upsilon_u, b.upsilon_f);
  b.upsilon_p = (1.0 + Y) * b.upsilon_uf;
  b.upsilon_pq1 = UP * UE;
  b.upsilon_pq2 = b.upsilon_p * UP + (1.0 + UP + rho * Uq) * UE * Y * Y / (g * rho) + (Y * Y * Uq + Y) / g;
  b.upsilon_pq = std::max(b.upsilon_pq1, b.upsilon_pq2);
  return b;
}

Trajectory finite_difference_sensitivity(const NldpModel& m, const PerturbationDirection& l, double eps,
                                         const NewtonOptions& opts) {
  m.validate();
  l.check(m.dims);
  if (!(eps > 0.0)) throw ValidationError("finite-difference step must be positive");
  const auto base = newton_equality_solve(m, m.d0, m.base, opts);
  const auto pert = newton_equality_solve(m, Vec(m.d0 + eps * l.stacked()), base.w, opts);
  return Trajectory::from_stacked(m.dims, Vec((pert.w.stacked() - base.w.stacked()) / eps));
}

}  // namespace dpsens

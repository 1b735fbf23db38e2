#pragma once

#include "dpsens/model.hpp"

#include <functional>
#include <optional>

namespace dpsens {

/// Discrete-time NLDP
///   min sum_k g_k(x_k, u_k, d_k) + g_N(x_N)
///   s.t. x_{k+1} = f_k(x_k, u_k, d_k), x_0 = d_{-1},
/// together with the base primal-dual point used for linearization.
///
/// Stage derivative evaluators act on the stacked stage vector v = (x; u; d).
/// Any that are left empty are replaced by central finite differences.
struct NldpModel {
  using StageScalar = std::function<double(int k, const Vec& x, const Vec& u, const Vec& d)>;
  using StageVector = std::function<Vec(int k, const Vec& x, const Vec& u, const Vec& d)>;
  using StageMatrix = std::function<Mat(int k, const Vec& x, const Vec& u, const Vec& d)>;
  using StageLagrangianHessian =
      std::function<Mat(int k, const Vec& x, const Vec& u, const Vec& d, const Vec& lambda_k)>;

  Dims dims;
  StageScalar stage_cost;
  std::function<double(const Vec& x)> terminal_cost;
  StageVector dynamics;

  StageVector stage_cost_gradient;                   // (g_x; g_u; g_d)
  std::function<Vec(const Vec& x)> terminal_gradient;
  StageMatrix dynamics_jacobian;                     // [A B C], nx x (nx + nu + nd)
  StageLagrangianHessian stage_lagrangian_hessian;   // Hessian of g_k - lambda_k^T f_k in v
  std::function<Mat(const Vec& x)> terminal_hessian;

  Vec d0;                          // (d_{-1}; d_0; ...; d_{N-1}), d_{-1} is the initial state
  Trajectory base;                 // x^0, u^0
  std::optional<Vec> multipliers;  // (lambda_{-1}; lambda_0; ...; lambda_{N-1})

  void validate() const;
};

/// d_{-1} for k = -1, otherwise d_k.
Vec reference_block(const Dims& dims, const Vec& d, int k);

Vec stage_gradient(const NldpModel& m, int k, const Vec& x, const Vec& u, const Vec& d);
Mat stage_jacobian(const NldpModel& m, int k, const Vec& x, const Vec& u, const Vec& d);
Mat stage_hessian(const NldpModel& m, int k, const Vec& x, const Vec& u, const Vec& d, const Vec& lambda_k);
Vec terminal_gradient(const NldpModel& m, const Vec& x);
Mat terminal_hessian(const NldpModel& m, const Vec& x);

double nldp_objective(const NldpModel& m, const Trajectory& w, const Vec& d);

/// (x_0 - d_{-1}; x_1 - f_0; ...; x_N - f_{N-1}).
Vec nldp_constraints(const NldpModel& m, const Trajectory& w, const Vec& d);

/// Gradient of the objective in stage ordering (x_0; u_0; ...; x_N).
Vec nldp_objective_gradient(const NldpModel& m, const Trajectory& w, const Vec& d);

/// Least-squares solution of grad f + G^T lambda = 0. Throws ValidationError
/// when the stationarity residual exceeds 1e-6, i.e. w is not a KKT point.
Vec recover_multipliers(const NldpModel& m, const Trajectory& w, const Vec& d);

/// QDP data (Lagrangian Hessian blocks and dynamics Jacobians) at (w, lambda; d).
QdpProblem linearize(const NldpModel& m, const Trajectory& w, const Vec& d, const Vec& lambda);

/// linearize() at the model's base point; multipliers are recovered when absent.
QdpProblem assemble_qdp_from_nldp(const NldpModel& m);

}  // namespace dpsens

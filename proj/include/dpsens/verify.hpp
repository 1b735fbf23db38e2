#pragma once

#include "dpsens/finite_diff.hpp"
#include "dpsens/model.hpp"
#include "dpsens/nldp.hpp"

#include <string>
#include <vector>

namespace dpsens {

struct KktSolution {
  Trajectory w;
  Vec multipliers;            // (N+1) nx, constraint order
  double stationarity = 0.0;  // ||2 H w + 2 D^T l + G^T lambda||_inf
  double feasibility = 0.0;   // ||G w - y||_inf
};

/// Solves [[H2, G^T], [G, 0]] [x; lambda] = [r1; r2] by partial-pivoting LU with
/// one step of iterative refinement. Throws SingularKkt when the reciprocal
/// condition estimate falls below 1e-14.
std::pair<Vec, Vec> solve_saddle_point(const Mat& H2, const Mat& G, const Vec& r1, const Vec& r2);

/// Minimizer of w^T H w + 2 l^T D w s.t. G w = y via the dense saddle-point system.
KktSolution dense_kkt_solve(const QdpProblem& qdp, const PerturbationDirection& l);

struct NewtonResult {
  Trajectory w;
  Vec multipliers;
  int iterations = 0;
  double residual = 0.0;  // max(||grad L||_inf, ||c||_inf) at return
};

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

/// Full-step Lagrange-Newton iteration on the NLDP at reference d, started at init.
/// Throws SolverDiverged when the residual is not below tolerance after max_iterations.
NewtonResult newton_equality_solve(const NldpModel& m, const Vec& d, const Trajectory& init,
                                   const NewtonOptions& opts = {});

struct BlockError {
  std::string block;  // "Q", "S", "R", "D1", "D2", "A", "B", "C" or "Q_N"
  int stage = 0;
  double error = 0.0;
};

struct HessianCheckReport {
  std::vector<BlockError> blocks;  // worst entry per (block, stage)
  BlockError worst;
  double threshold = 1e-5;
  [[nodiscard]] bool pass() const { return worst.error <= threshold; }
};

/// Compares the model's analytic Lagrangian Hessian blocks and dynamics
/// Jacobians at its base point against central finite differences.
/// Error per entry is |analytic - fd| / max(1, |analytic|).
HessianCheckReport finite_diff_hessian_check(const NldpModel& m, double threshold = 1e-5);

}  // namespace dpsens

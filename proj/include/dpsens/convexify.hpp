#pragma once

#include "dpsens/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dpsens {

/// Output of the linear-shift convexification. `problem` holds the blocks
/// (Q~_k, R~_k, S~_k, D~_k1, D~_k2) with the original A_k, B_k, C_k and
/// terminal block delta * I; Qbar holds the shift matrices Qbar_0..Qbar_N.
struct ConvexifiedQdp {
  double delta = 0.0;
  QdpProblem problem;
  std::vector<Mat> Qbar;
  /// Set when delta == 0: only H~_k >= 0 is guaranteed.
  bool semidefinite = false;
  std::vector<std::string> warnings;

  [[nodiscard]] const Dims& dims() const { return problem.dims(); }
  /// max over stages of the norms of Q~, R~, S~, D~1, D~2, and delta (the terminal block).
  [[nodiscard]] double upsilon_tilde() const;
  /// min over k < N of lambda_min(H~_k).
  [[nodiscard]] double min_stage_eig() const;
  [[nodiscard]] double min_rtilde_eig() const;
};

/// Backward recursion
///   Q~_N = delta I, Qbar_N = Q_N - delta I;
///   Q^_k = Q_k + A^T Qbar A, S~_k = S_k + B^T Qbar A, R~_k = R_k + B^T Qbar B,
///   D~_k1 = D_k1 + C^T Qbar A, D~_k2 = D_k2 + C^T Qbar B,
///   Q~_k = S~^T R~^{-1} S~ + delta I, Qbar_k = Q^_k - Q~_k   (Qbar = Qbar_{k+1}).
/// When gamma is supplied and delta >= gamma a warning is attached.
ConvexifiedQdp convexify(const QdpProblem& qdp, double delta, std::optional<double> gamma = std::nullopt);

/// fraction * gamma. Throws SoscFailed for gamma <= 0, ValidationError for fraction outside (0, 1).
double select_delta_from_gamma(double gamma, double fraction = 0.9);
double select_delta(const QdpProblem& qdp, double fraction = 0.9);

/// Every Q_k (terminal included) replaced by Q_k - delta I.
QdpProblem shifted_problem(const QdpProblem& qdp, double delta);

/// Objective of the convexified QDP including the l_k^T C_k^T Qbar_{k+1} C_k l_k
/// terms that are not stored as blocks.
double eval_convexified_objective(const ConvexifiedQdp& conv, const PerturbationDirection& l, const Trajectory& w);

struct EquivalenceReport {
  Trajectory original;     // dense KKT solution of the original QDP
  Trajectory convexified;  // Riccati solution of the convexified QDP
  double primal_gap = 0.0;          // ||w_orig - w_conv||_inf / max(1, ||w_orig||_inf)
  double objective_original = 0.0;
  double objective_convexified = 0.0;
  double offset = 0.0;              // objective_convexified - objective_original
  double expected_offset = 0.0;     // -l_{-1}^T Qbar_0 l_{-1}
  double offset_error = 0.0;        // |offset - expected| / max(1, |expected|, |objective_original|)
};

EquivalenceReport verify_equivalence(const QdpProblem& qdp, const ConvexifiedQdp& conv, const PerturbationDirection& l);

}  // namespace dpsens

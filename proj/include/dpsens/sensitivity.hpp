#pragma once

#include "dpsens/convexify.hpp"
#include "dpsens/model.hpp"
#include "dpsens/nldp.hpp"
#include "dpsens/riccati.hpp"
#include "dpsens/verify.hpp"

#include <optional>
#include <vector>

namespace dpsens {

/// Canonical basis direction of Pi_i: coordinate j (0-based) of l_{-1} when
/// i = -1, of l_i otherwise.
PerturbationDirection unit_direction(const Dims& dims, int i, int j);

/// Least-squares line y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Throws InsufficientData with fewer than two points or constant x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
  double rho_fit = 0.0;     // exp(slope)
  double intercept = 0.0;   // log-scale intercept
  double r_squared = 0.0;
  int points = 0;
};

/// Fits log(norm_k) against the distance |k - i| (k for i = -1) over stages whose
/// norm exceeds floor. Needs at least 3 such stages on one side of i.
DecayFit fit_decay_rate(const std::vector<double>& norms, int i, double floor = 1e-12);

struct SensitivityResult {
  Trajectory w;
  std::vector<double> norm_p;  // N + 1
  std::vector<double> norm_q;  // N + 1, zero at k = N
  std::optional<int> source_stage;
  std::optional<DecayFit> fit;
  double gamma = 0.0;
  double delta = 0.0;
  double identity_residual = 0.0;  // max Riccati identity residual of the backward pass

  /// max(norm_p[k], norm_q[k]).
  [[nodiscard]] std::vector<double> stage_norms() const;
};

/// Convexify-then-Riccati pipeline prepared once per problem; solve() is const
/// and may be called concurrently for different directions.
class SensitivitySolver {
 public:
  explicit SensitivitySolver(QdpProblem qdp, double delta_fraction = 0.9);

  [[nodiscard]] SensitivityResult solve(const PerturbationDirection& l) const;

  [[nodiscard]] const QdpProblem& problem() const { return qdp_; }
  [[nodiscard]] const ConvexifiedQdp& convexified() const { return conv_; }
  [[nodiscard]] const RiccatiSolution& riccati() const { return rs_; }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double delta() const { return conv_.delta; }

 private:
  QdpProblem qdp_;
  double gamma_;
  ConvexifiedQdp conv_;
  RiccatiSolution rs_;
};

SensitivityResult solve_sensitivity(const QdpProblem& qdp, const PerturbationDirection& l,
                                    double delta_fraction = 0.9);

/// [B_{k+t-1}, A_{k+t-1} B_{k+t-2}, ..., A_{k+t-1} ... A_{k+1} B_k], nx x t nu.
Mat controllability_matrix(const QdpProblem& qdp, int k, int t);

struct ControllabilityReport {
  std::vector<std::optional<int>> t_k;  // smallest admissible t per stage
  std::vector<double> gramian_min_eig;  // at t_k, or at the largest t tried
  int t = 0;                            // max over found t_k
  double lambda_C = 0.0;
  bool pass = false;
};

ControllabilityReport controllability(const QdpProblem& qdp, double lambda_C, int t_max);

/// Lower bound on lambda_min of a block matrix: (beta_C / (beta_C + beta_B))^2 * min(beta_S, beta_C).
double lambda_bcs(double beta_S, double beta_B, double beta_C);

/// Family-uniform upper bounds that replace the per-instance measurements.
struct BoundsOverrides {
  std::optional<double> upsilon;
  std::optional<double> upsilon_tilde;
  std::optional<double> upsilon_tilde_Qbar;
};

struct ConstantsOptions {
  double lambda_C = 1e-3;
  std::optional<int> t_max;  // defaults to N
  BoundsOverrides overrides;
};

struct BoundsReport {
  double gamma = 0.0;
  double delta = 0.0;
  double upsilon = 0.0;
  int t = 0;
  double lambda_C = 0.0;
  double psi = 0.0;
  double upsilon_Qbar = 0.0;
  double upsilon_tilde = 0.0;
  double lambda_BCS = 0.0;
  double lambda_H = 0.0;
  double upsilon_tilde_Qbar = 0.0;
  double upsilon_E = 0.0;
  double rho = 0.0;
  /// max(upsilon, upsilon_tilde): bounds the data of both the original and
  /// the convexified problem in the decay constants below.
  double upsilon_data = 0.0;
  double upsilon_P = 0.0;
  double upsilon_u = 0.0;
  double upsilon_f = 0.0;
  double upsilon_uf = 0.0;
  double upsilon_p = 0.0;
  double upsilon_pq1 = 0.0;
  double upsilon_pq2 = 0.0;
  double upsilon_pq = 0.0;

  /// upsilon_pq * rho^{|k - i|} (rho^k for i = -1).
  [[nodiscard]] double decay_bound(int i, int k) const;
};

/// Throws SoscFailed for gamma <= 0, ValidationError when delta is outside
/// (0, gamma) or the controllability check fails.
BoundsReport theoretical_constants(const QdpProblem& qdp, double delta, const ConstantsOptions& opts = {});
/// Same, reusing an existing convexification (and its gamma).
BoundsReport theoretical_constants(const QdpProblem& qdp, const ConvexifiedQdp& conv, double gamma,
                                   const ConstantsOptions& opts = {});

/// (x*(d0 + eps l) - x*(d0)) / eps and the control analogue, both solves
/// started from the model's base point.
Trajectory finite_difference_sensitivity(const NldpModel& m, const PerturbationDirection& l, double eps,
                                         const NewtonOptions& opts = {});

}  // namespace dpsens

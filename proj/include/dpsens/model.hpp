#pragma once

#include "dpsens/linalg.hpp"

#include <optional>
#include <vector>

namespace dpsens {

/// Horizon length and block sizes of a stagewise problem.
struct Dims {
  int N = 0;
  int nx = 0;
  int nu = 0;
  int nd = 0;

  /// Number of primal variables (p_0, q_0, ..., q_{N-1}, p_N).
  [[nodiscard]] int nz() const { return (N + 1) * nx + N * nu; }
  /// Number of equality constraints (initial condition plus N dynamics rows).
  [[nodiscard]] int nc() const { return (N + 1) * nx; }
  /// Length of a reference perturbation (l_{-1}; l_0; ...; l_{N-1}).
  [[nodiscard]] int nl() const { return nx + N * nd; }
  [[nodiscard]] int state_offset(int k) const { return k * (nx + nu); }
  [[nodiscard]] int control_offset(int k) const { return k * (nx + nu) + nx; }

  void validate() const;
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Stage k data of the quadratic dynamic program
///   [p;q;l]^T [[Q, S^T, D1^T], [S, R, D2^T], [D1, D2, 0]] [p;q;l]
///   s.t. p_{k+1} = A p + B q + C l.
struct StageBlocks {
  Mat Q;   // nx x nx, symmetric
  Mat R;   // nu x nu, symmetric
  Mat S;   // nu x nx
  Mat D1;  // nd x nx
  Mat D2;  // nd x nu
  Mat A;   // nx x nx
  Mat B;   // nx x nu
  Mat C;   // nx x nd
};

/// Immutable stagewise QDP. Construction checks every shape and finiteness,
/// and symmetrizes Q_k, R_k and the terminal block (rejecting asymmetry above
/// kSymmetryTolerance relative to the block scale).
class QdpProblem {
 public:
  static constexpr double kSymmetryTolerance = 1e-10;

  QdpProblem(Dims dims, std::vector<StageBlocks> stages, Mat terminal_Q);

  [[nodiscard]] const Dims& dims() const { return dims_; }
  [[nodiscard]] int horizon() const { return dims_.N; }
  [[nodiscard]] const StageBlocks& stage(int k) const { return stages_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] const std::vector<StageBlocks>& stages() const { return stages_; }
  [[nodiscard]] const Mat& terminal_Q() const { return terminal_Q_; }

  /// H_k = [[Q_k, S_k^T], [S_k, R_k]] for k < N.
  [[nodiscard]] Mat stage_hessian(int k) const;

  /// Assumption-3(i) style bound: max operator norm over every data block.
  [[nodiscard]] double max_block_norm() const;

 private:
  Dims dims_;
  std::vector<StageBlocks> stages_;
  Mat terminal_Q_;
};

/// Direction l = (l_{-1}; l_0; ...; l_{N-1}) along which the reference is perturbed.
struct PerturbationDirection {
  Vec l_minus1;              // nx
  std::vector<Vec> stages;   // N entries of length nd
  std::optional<int> stage;  // canonical source stage i in {-1, 0, ..., N-1}

  static PerturbationDirection zero(const Dims& dims);
  static PerturbationDirection from_stacked(const Dims& dims, const Vec& l);

  [[nodiscard]] Vec stacked() const;
  [[nodiscard]] double norm() const { return stacked().norm(); }
  /// Stages i >= 0 with a nonzero block.
  [[nodiscard]] std::vector<int> support() const;
  void check(const Dims& dims) const;
};

/// States p_0..p_N and controls q_0..q_{N-1}.
struct Trajectory {
  std::vector<Vec> p;
  std::vector<Vec> q;

  static Trajectory zero(const Dims& dims);
  /// Unpacks w = (p_0; q_0; ...; p_N).
  static Trajectory from_stacked(const Dims& dims, const Vec& w);

  [[nodiscard]] Vec stacked() const;
  void check(const Dims& dims) const;
};

/// Dense H = diag(H_0, ..., H_{N-1}, Q_N) in stage ordering.
Mat dense_hessian(const QdpProblem& qdp);

/// D^T l lifted to z coordinates: stage k contributes D1_k^T l_k and D2_k^T l_k.
/// l_{-1} has no D block and is ignored.
Vec lifted_linear_term(const QdpProblem& qdp, const PerturbationDirection& l);

/// Objective of the stagewise QDP:
/// sum_k [p;q;l]^T blocks [p;q;l] + p_N^T Q_N p_N.
double eval_qdp_objective(const QdpProblem& qdp, const PerturbationDirection& l, const Trajectory& w);

/// Propagates p_0 = l_{-1}, p_{k+1} = A_k p_k + B_k q_k + C_k l_k.
Trajectory rollout_dynamics(const QdpProblem& qdp, const PerturbationDirection& l,
                            const std::vector<Vec>& controls);

/// Same problem with every Q_k (terminal included) replaced by Q_k + shift * I.
QdpProblem with_state_shift(const QdpProblem& qdp, double shift);

}  // namespace dpsens

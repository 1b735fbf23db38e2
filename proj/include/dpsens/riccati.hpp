#pragma once

#include "dpsens/model.hpp"

namespace dpsens {

/// Backward Riccati sweep
///   K_N = Q_N,  W_k = R_k + B_k^T K_{k+1} B_k,
///   P_k = -W_k^{-1} (B_k^T K_{k+1} A_k + S_k),
///   K_k = Q_k + A_k^T K_{k+1} A_k + (B_k^T K_{k+1} A_k + S_k)^T P_k,
/// plus the closed-loop matrices E_k = A_k + B_k P_k and O_k = B_k W_k^{-1} B_k^T.
struct RiccatiSolution {
  std::vector<Mat> K;     // N + 1
  std::vector<Mat> W;     // N
  std::vector<Mat> Winv;  // N
  std::vector<Mat> P;     // N
  std::vector<Mat> E;     // N
  std::vector<Mat> O;     // N
  /// Per-stage max-entry residual of K_k - E_k^T K_{k+1} E_k - [I P_k^T] H_k [I; P_k].
  std::vector<double> identity_residual;

  [[nodiscard]] int horizon() const { return static_cast<int>(W.size()); }
  [[nodiscard]] double max_identity_residual() const;
};

/// Throws IndefiniteW(k, lambda_min) if lambda_min(W_k) <= 1e-12.
RiccatiSolution backward_pass(const QdpProblem& qdp);

/// Minimizer of the QDP for the direction l (controls from the feedback law
/// plus the affine terms driven by l, states by rollout).
Trajectory forward_solve(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l);

/// J_k(p) = p^T K p + linear^T p + T.
struct CostToGo {
  Mat K;
  Vec linear;
  double T = 0.0;

  [[nodiscard]] double operator()(const Vec& p) const { return p.dot(K * p) + linear.dot(p) + T; }
};

CostToGo cost_to_go_terms(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l, int k);
double cost_to_go(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l, int k,
                  const Vec& p_k);

/// E_n ... E_m, identity when n < m.
Mat closed_loop_product(const RiccatiSolution& rs, int m, int n);
/// ||E_j ... E_i|| for 0 <= i <= j <= N - 1.
double closed_loop_product_norm(const RiccatiSolution& rs, int i, int j);

/// Blocks of the closed form p_k = (E_{k-1}..E_0) l_{-1} + sum_i U_i^k l_i + sum_i F_i^k C_i l_i.
Mat closed_form_U(const RiccatiSolution& rs, const QdpProblem& qdp, int i, int k);
Mat closed_form_F(const RiccatiSolution& rs, const QdpProblem& qdp, int i, int k);

/// States p_0..p_N evaluated from the closed form; only stages in the
/// support of l contribute U, F blocks.
std::vector<Vec> closed_form_p(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l);

}  // namespace dpsens

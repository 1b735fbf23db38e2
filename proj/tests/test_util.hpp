#pragma once

#include "dpsens/model.hpp"

#include <Eigen/Dense>

#include <random>

namespace dpsens::testing {

inline Mat scalar(double v) { return Mat::Constant(1, 1, v); }

/// Same scalar blocks at every stage.
inline QdpProblem scalar_chain(int N, double Q, double R, double S, double A, double B, double C, double D1,
                               double D2, double QN) {
  StageBlocks s{scalar(Q), scalar(R), scalar(S), scalar(D1), scalar(D2), scalar(A), scalar(B), scalar(C)};
  return QdpProblem(Dims{N, 1, 1, 1}, std::vector<StageBlocks>(static_cast<std::size_t>(N), s), scalar(QN));
}

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline PerturbationDirection random_direction(std::mt19937_64& rng, const Dims& d) {
  return PerturbationDirection::from_stacked(d, random_vec(rng, d.nl()));
}

/// Symmetric matrix M over (w; l) with objective [w; l]^T M [w; l]; assembled
/// entry by entry from the stage blocks, independent of dense_hessian().
inline Mat joint_quadratic(const QdpProblem& qdp) {
  const auto& d = qdp.dims();
  const int nz = d.nz(), nl = d.nl();
  Mat M = Mat::Zero(nz + nl, nz + nl);
  for (int k = 0; k < d.N; ++k) {
    const auto& s = qdp.stage(k);
    const int px = k * (d.nx + d.nu), qu = px + d.nx, ld = nz + d.nx + k * d.nd;
    for (int a = 0; a < d.nx; ++a)
      for (int b = 0; b < d.nx; ++b) M(px + a, px + b) += s.Q(a, b);
    for (int a = 0; a < d.nu; ++a)
      for (int b = 0; b < d.nu; ++b) M(qu + a, qu + b) += s.R(a, b);
    for (int a = 0; a < d.nu; ++a) {
      for (int b = 0; b < d.nx; ++b) {
        M(qu + a, px + b) += s.S(a, b);
        M(px + b, qu + a) += s.S(a, b);
      }
    }
    for (int a = 0; a < d.nd; ++a) {
      for (int b = 0; b < d.nx; ++b) {
        M(ld + a, px + b) += s.D1(a, b);
        M(px + b, ld + a) += s.D1(a, b);
      }
      for (int b = 0; b < d.nu; ++b) {
        M(ld + a, qu + b) += s.D2(a, b);
        M(qu + b, ld + a) += s.D2(a, b);
      }
    }
  }
  const int pN = d.N * (d.nx + d.nu);
  M.block(pN, pN, d.nx, d.nx) += qdp.terminal_Q();
  return M;
}

/// Equality-constrained minimizer via an explicit null-space parametrization
/// w = w_p + Z v (a different factorization path than the KKT LU oracle).
inline Vec nullspace_qp_solve(const Mat& H, const Vec& g, const Mat& G, const Vec& y) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(G);
  const Vec wp = cod.solve(y);
  Eigen::FullPivLU<Mat> lu(G);
  const Mat Z = lu.kernel();
  const Mat red = Z.transpose() * H * Z;
  const Vec rhs = -Z.transpose() * (H * wp + g);
  const Vec v = red.fullPivLu().solve(rhs);
  return wp + Z * v;
}

inline double rel_inf(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace dpsens::testing

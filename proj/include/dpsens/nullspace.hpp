#pragma once

#include "dpsens/model.hpp"

namespace dpsens {

/// G w = y for the stagewise constraints p_0 = l_{-1}, p_{k+1} - A_k p_k - B_k q_k = C_k l_k.
struct ConstraintSystem {
  Mat G;  // (N+1) nx x nz
  Vec y;  // (N+1) nx
};

/// Orthonormal basis of ker(G).
struct NullspaceBasis {
  Mat Z;  // nz x N nu
};

/// Staircase Jacobian built from the dynamics blocks alone.
Mat constraint_jacobian(const Dims& dims, const std::vector<Mat>& A, const std::vector<Mat>& B);
Mat constraint_jacobian(const QdpProblem& qdp);

ConstraintSystem assemble_constraints(const QdpProblem& qdp, const PerturbationDirection& l);

/// Column-pivoted Householder QR of G^T; the trailing nz - nc orthogonal
/// columns span the kernel. Throws ValidationError when G G^T is numerically
/// singular (min eigenvalue <= 1e-10).
NullspaceBasis nullspace_basis(const Mat& G);
inline NullspaceBasis nullspace_basis(const ConstraintSystem& cs) { return nullspace_basis(cs.G); }

/// lambda_min(Z^T H Z). A nonpositive value means SOSC fails.
double reduced_hessian_gamma(const Mat& H, const Mat& G);
double reduced_hessian_gamma(const QdpProblem& qdp);

}  // namespace dpsens

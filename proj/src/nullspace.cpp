#include "dpsens/nullspace.hpp"

#include "dpsens/errors.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>

namespace dpsens {

Mat constraint_jacobian(const Dims& dims, const std::vector<Mat>& A, const std::vector<Mat>& B) {
  dims.validate();
  if (static_cast<int>(A.size()) != dims.N || static_cast<int>(B.size()) != dims.N) {
    throw ShapeError("constraint_jacobian needs N dynamics blocks");
  }
  const int nx = dims.nx, nu = dims.nu;
  Mat G = Mat::Zero(dims.nc(), dims.nz());
  G.block(0, 0, nx, nx).setIdentity();
  for (int k = 0; k < dims.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const int row = (k + 1) * nx;
    G.block(row, dims.state_offset(k), nx, nx) = -A[i];
    G.block(row, dims.control_offset(k), nx, nu) = -B[i];
    G.block(row, dims.state_offset(k + 1), nx, nx).setIdentity();
  }
  return G;
}

Mat constraint_jacobian(const QdpProblem& qdp) {
  std::vector<Mat> A, B;
  for (const auto& s : qdp.stages()) {
    A.push_back(s.A);
    B.push_back(s.B);
  }
  return constraint_jacobian(qdp.dims(), A, B);
}

ConstraintSystem assemble_constraints(const QdpProblem& qdp, const PerturbationDirection& l) {
  const auto& d = qdp.dims();
  l.check(d);
  ConstraintSystem cs;
  cs.G = constraint_jacobian(qdp);
  cs.y.resize(d.nc());
  cs.y.head(d.nx) = l.l_minus1;
  for (int k = 0; k < d.N; ++k) {
    cs.y.segment((k + 1) * d.nx, d.nx) = qdp.stage(k).C * l.stages[static_cast<std::size_t>(k)];
  }
  return cs;
}

NullspaceBasis nullspace_basis(const Mat& G) {
  const Eigen::Index nc = G.rows(), nz = G.cols();
  if (nc > nz) throw ShapeError("constraint Jacobian has more rows than columns");
  const double lmin = min_eig(G * G.transpose());
  if (lmin <= 1e-10) {
    throw ValidationError("constraint Jacobian is rank deficient (min eigenvalue of G G^T = " +
                          std::to_string(lmin) + ")");
  }
  Eigen::ColPivHouseholderQR<Mat> qr(G.transpose());
  const Mat Q = qr.householderQ() * Mat::Identity(nz, nz);
  return NullspaceBasis{Q.rightCols(nz - nc)};
}

double reduced_hessian_gamma(const Mat& H, const Mat& G) {
  const Mat Z = nullspace_basis(G).Z;
  if (Z.cols() == 0) return INFINITY;
  return min_eig(symmetrized(Z.transpose() * H * Z));
}

double reduced_hessian_gamma(const QdpProblem& qdp) {
  return reduced_hessian_gamma(dense_hessian(qdp), constraint_jacobian(qdp));
}

}  // namespace dpsens

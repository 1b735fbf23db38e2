#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dpsens {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Largest singular value (operator 2-norm). Computed from the eigenvalues
/// of the smaller Gram matrix since every block here is a few rows wide.
double op_norm(const Mat& m);

/// Smallest eigenvalue of a symmetric matrix. Only the lower triangle is read.
double min_eig(const Mat& sym);
double max_eig(const Mat& sym);

/// max_ij |m_ij|
inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double asymmetry(const Mat& m);

inline Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

bool all_finite(const Mat& m);

}  // namespace dpsens

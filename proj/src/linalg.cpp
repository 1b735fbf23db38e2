#include "dpsens/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace dpsens {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const Mat gram = m.rows() <= m.cols() ? Mat(m * m.transpose()) : Mat(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double min_eig(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double asymmetry(const Mat& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return max_abs(m - m.transpose());
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace dpsens

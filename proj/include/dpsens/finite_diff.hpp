#pragma once

#include "dpsens/linalg.hpp"

#include <cmath>
#include <functional>

namespace dpsens::fd {

/// Central-difference step for a coordinate of magnitude |v|.
inline double step(double v, double base = 1e-5) { return base * (1.0 + std::abs(v)); }

Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x);

/// Jacobian of a vector map; rows are outputs.
Mat jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x);

/// Hessian from central differences of an analytic gradient, symmetrized.
Mat hessian_from_gradient(const std::function<Vec(const Vec&)>& grad, const Vec& x);

/// Hessian of a scalar function by second-order central differences
/// (used only when no analytic gradient is available).
Mat hessian(const std::function<double(const Vec&)>& f, const Vec& x);

}  // namespace dpsens::fd

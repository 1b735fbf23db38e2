#pragma once

#include "dpsens/model.hpp"
#include "dpsens/nldp.hpp"

#include <cstdint>
#include <random>

namespace dpsens {

struct RandomInstanceOptions {
  int N = 10;
  int nx = 2;
  int nu = 2;
  int nd = 2;
  double gamma0 = 0.5;  // target lower bound on the reduced Hessian
};

/// Random QDP satisfying SOSC with gamma >= gamma0 (up to 0.1%) and an
/// indefinite R_k at every stage. Dynamics, S and D blocks are uniform in
/// [-1, 1]; R_k = M_k - beta_k B_k^T B_k with M_k positive definite, and Q_k
/// is inflated by a diagonal shift until the reduced Hessian bound holds.
QdpProblem random_sosc_instance(std::mt19937_64& rng, const RandomInstanceOptions& opts);

/// Scalar tridiagonal family: nx = nu = nd = 1, A_k = B_k = 1, S_k = 0,
/// R_k = b_k, Q_k = 2|b_k| + 2|b_{k-1}| + 5 gamma0, Q_N = 2|b_{N-1}| + 5 gamma0.
/// b_k, C_k, D_k1, D_k2 are drawn uniform in [-1, 1] from the seed, so instances
/// sharing a seed differ only in gamma0.
QdpProblem tridiagonal_instance(int N, double gamma0, std::uint64_t seed);

enum class BenchmarkDynamics { Linear, Exp };

/// g_k = mu1 (u_k - d_k)^2 - mu2 (x_k - d_k)^2, g_N = -mu2 x_N^2,
/// x_{k+1} = u_k + f(d_k) with f(x) = x or exp(x) - 1, x_0 = d_{-1} = 0.
/// Base point, reference and multipliers are all zero.
NldpModel benchmark_model(int N, double mu1, double mu2, BenchmarkDynamics kind);

QdpProblem benchmark_qdp(int N, double mu1, double mu2, BenchmarkDynamics kind);

}  // namespace dpsens

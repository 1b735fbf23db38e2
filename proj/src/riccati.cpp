#include "dpsens/riccati.hpp"

#include "dpsens/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>

namespace dpsens {

double RiccatiSolution::max_identity_residual() const {
  double r = 0.0;
  for (double v : identity_residual) r = std::max(r, v);
  return r;
}

RiccatiSolution backward_pass(const QdpProblem& qdp) {
  const auto& d = qdp.dims();
  const int N = d.N;
  const auto n = static_cast<std::size_t>(N);
  RiccatiSolution rs;
  rs.K.resize(n + 1);
  rs.W.resize(n);
  rs.Winv.resize(n);
  rs.P.resize(n);
  rs.E.resize(n);
  rs.O.resize(n);
  rs.identity_residual.resize(n);
  rs.K[n] = qdp.terminal_Q();
  for (int k = N - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& s = qdp.stage(k);
    const Mat& Kn = rs.K[i + 1];
    const Mat BtK = s.B.transpose() * Kn;
    const Mat W = symmetrized(s.R + BtK * s.B);
    const double lmin = min_eig(W);
    if (!(lmin > 1e-12)) throw IndefiniteW(k, lmin);
    Eigen::LLT<Mat> llt(W);
    const Mat Winv = symmetrized(llt.solve(identity(d.nu)));
    const Mat G = BtK * s.A + s.S;  // nu x nx
    const Mat P = -llt.solve(G);
    rs.K[i] = symmetrized(s.Q + s.A.transpose() * Kn * s.A + G.transpose() * P);
    rs.W[i] = W;
    rs.Winv[i] = Winv;
    rs.P[i] = P;
    rs.E[i] = s.A + s.B * P;
    rs.O[i] = s.B * Winv * s.B.transpose();

    Mat IP(d.nx + d.nu, d.nx);
    IP << identity(d.nx), P;
    const Mat lhs = rs.K[i] - rs.E[i].transpose() * Kn * rs.E[i] - IP.transpose() * qdp.stage_hessian(k) * IP;
    rs.identity_residual[i] = max_abs(lhs);
  }
  return rs;
}

namespace {

void check_pair(const RiccatiSolution& rs, const QdpProblem& qdp) {
  if (rs.horizon() != qdp.horizon()) throw ShapeError("Riccati solution and QDP have different horizons");
}

/// Linear coefficients s_k of J_k(p) = p^T K_k p + 2 s_k^T p + T_k, k = 0..N.
std::vector<Vec> linear_coefficients(const RiccatiSolution& rs, const QdpProblem& qdp,
                                     const PerturbationDirection& l) {
  const auto& d = qdp.dims();
  std::vector<Vec> s(static_cast<std::size_t>(d.N + 1), Vec::Zero(d.nx));
  for (int k = d.N - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& st = qdp.stage(k);
    const Vec& lk = l.stages[i];
    s[i] = rs.E[i].transpose() * (s[i + 1] + rs.K[i + 1] * (st.C * lk)) + (st.D1 + st.D2 * rs.P[i]).transpose() * lk;
  }
  return s;
}

/// g_k = (D2^T + B^T K_{k+1} C) l_k + B^T s_{k+1}; q_k = P_k p_k - W_k^{-1} g_k.
Vec affine_term(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l,
                const std::vector<Vec>& s, int k) {
  const auto i = static_cast<std::size_t>(k);
  const auto& st = qdp.stage(k);
  const Vec& lk = l.stages[i];
  return st.D2.transpose() * lk + st.B.transpose() * (rs.K[i + 1] * (st.C * lk) + s[i + 1]);
}

}  // namespace

Trajectory forward_solve(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l) {
  check_pair(rs, qdp);
  const auto& d = qdp.dims();
  l.check(d);
  const auto s = linear_coefficients(rs, qdp, l);
  Trajectory w;
  w.p.push_back(l.l_minus1);
  for (int k = 0; k < d.N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& st = qdp.stage(k);
    const Vec q = rs.P[i] * w.p[i] - rs.Winv[i] * affine_term(rs, qdp, l, s, k);
    w.q.push_back(q);
    w.p.push_back(st.A * w.p[i] + st.B * q + st.C * l.stages[i]);
  }
  return w;
}

CostToGo cost_to_go_terms(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l, int k) {
  check_pair(rs, qdp);
  const auto& d = qdp.dims();
  l.check(d);
  if (k < 0 || k > d.N) throw ValidationError("cost-to-go stage out of range");
  const auto s = linear_coefficients(rs, qdp, l);
  double T = 0.0;
  for (int j = d.N - 1; j >= k; --j) {
    const auto i = static_cast<std::size_t>(j);
    const Vec Cl = qdp.stage(j).C * l.stages[i];
    const Vec g = affine_term(rs, qdp, l, s, j);
    T += Cl.dot(rs.K[i + 1] * Cl) + 2.0 * s[i + 1].dot(Cl) - g.dot(rs.Winv[i] * g);
  }
  const auto kk = static_cast<std::size_t>(k);
  return CostToGo{rs.K[kk], 2.0 * s[kk], T};
}

double cost_to_go(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l, int k,
                  const Vec& p_k) {
  if (p_k.size() != qdp.dims().nx) throw ShapeError("cost-to-go state has wrong length");
  return cost_to_go_terms(rs, qdp, l, k)(p_k);
}

Mat closed_loop_product(const RiccatiSolution& rs, int m, int n) {
  const Eigen::Index nx = rs.K.front().rows();
  Mat prod = identity(nx);
  for (int j = std::max(m, 0); j <= n; ++j) prod = rs.E.at(static_cast<std::size_t>(j)) * prod;
  return prod;
}

double closed_loop_product_norm(const RiccatiSolution& rs, int i, int j) {
  if (i < 0 || j < i || j >= rs.horizon()) throw ValidationError("closed-loop product needs 0 <= i <= j <= N-1");
  return op_norm(closed_loop_product(rs, i, j));
}

namespace {

// M_i^k = -(D_{i1} + D_{i2} P_i) E_{i-1} ... E_k, nd x nx.
Mat feedforward_M(const RiccatiSolution& rs, const QdpProblem& qdp, int i, int k) {
  const auto& st = qdp.stage(i);
  return -(st.D1 + st.D2 * rs.P[static_cast<std::size_t>(i)]) * closed_loop_product(rs, k, i - 1);
}

// V_i^k = -K_{i+1} E_i ... E_k, nx x nx.
Mat feedforward_V(const RiccatiSolution& rs, int i, int k) {
  return -rs.K[static_cast<std::size_t>(i + 1)] * closed_loop_product(rs, k, i);
}

void check_indices(const QdpProblem& qdp, int i, int k) {
  if (i < 0 || i >= qdp.horizon() || k < 0 || k > qdp.horizon()) {
    throw ValidationError("closed-form block indices out of range");
  }
}

}  // namespace

Mat closed_form_U(const RiccatiSolution& rs, const QdpProblem& qdp, int i, int k) {
  check_pair(rs, qdp);
  check_indices(qdp, i, k);
  const auto& d = qdp.dims();
  Mat U = Mat::Zero(d.nx, d.nd);
  for (int s = 0; s < std::min(i, k); ++s) {
    U += closed_loop_product(rs, s + 1, k - 1) * rs.O[static_cast<std::size_t>(s)] *
         feedforward_M(rs, qdp, i, s + 1).transpose();
  }
  if (i + 1 <= k) {
    const auto ii = static_cast<std::size_t>(i);
    U -= closed_loop_product(rs, i + 1, k - 1) * qdp.stage(i).B * rs.Winv[ii] * qdp.stage(i).D2.transpose();
  }
  return U;
}

Mat closed_form_F(const RiccatiSolution& rs, const QdpProblem& qdp, int i, int k) {
  check_pair(rs, qdp);
  check_indices(qdp, i, k);
  const auto& d = qdp.dims();
  Mat F = Mat::Zero(d.nx, d.nx);
  for (int s = 0; s < std::min(i, k); ++s) {
    F += closed_loop_product(rs, s + 1, k - 1) * rs.O[static_cast<std::size_t>(s)] * feedforward_V(rs, i, s + 1).transpose();
  }
  if (i + 1 <= k) {
    const auto ii = static_cast<std::size_t>(i);
    F += closed_loop_product(rs, i + 1, k - 1) * (identity(d.nx) - rs.O[ii] * rs.K[ii + 1]);
  }
  return F;
}

std::vector<Vec> closed_form_p(const RiccatiSolution& rs, const QdpProblem& qdp, const PerturbationDirection& l) {
  check_pair(rs, qdp);
  const auto& d = qdp.dims();
  l.check(d);
  const auto support = l.support();
  std::vector<Vec> p;
  for (int k = 0; k <= d.N; ++k) {
    Vec pk = closed_loop_product(rs, 0, k - 1) * l.l_minus1;
    for (int i : support) {
      const Vec& li = l.stages[static_cast<std::size_t>(i)];
      pk += closed_form_U(rs, qdp, i, k) * li + closed_form_F(rs, qdp, i, k) * (qdp.stage(i).C * li);
    }
    p.push_back(pk);
  }
  return p;
}

}  // namespace dpsens

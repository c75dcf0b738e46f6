#pragma once

// Homogeneous ball of radius r rolling on the hyperplane x_n = r while the
// hyperplane rotates with constant angular matrix eta in so(n), eta e_n = 0.
// Full state (x, g, K) with x in R^n, g in SO(n), and the contact angular
// momentum K = I(Omega) + m r^2 (Gamma Omega + Omega Gamma), Gamma = gamma gamma^T,
// gamma = g^{-1} e_n:
//
//   xdot = r g Omega gamma + eta x
//   gdot = g Omega
//   Kdot = [K, Omega] - m r (g^{-1} eta xdot) wedge gamma
//
// Reduced body-frame variables X = g^{-1} x, Xi = g^{-1} eta g close among
// themselves:
//
//   Kdot     = [K, Omega] - m r^2 [Xi, (Omega gamma) wedge gamma]
//              - m r [Xi, [Xi, X wedge gamma]]
//   Xdot     = (Xi - Omega) X + r Omega gamma
//   gammadot = -Omega gamma
//   Xidot    = [Xi, Omega]
//
// on the invariant manifold |gamma| = 1, gamma . X = r, Xi gamma = 0 and Xi
// isospectral to eta.  The moving energy of the plane's rotation generator is
//   E = 1/2 <K, Omega> - m/2 |eta x|^2  =  1/2 <K, Omega> - m/2 |Xi X|^2.

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/liegroup.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

struct ChapNDParams {
  int n = 3;
  double mass = 1.0;
  double radius = 1.0;
  Mat eta;  // so(n), eta e_n = 0
  SonInertia inertia = SonInertia::from_J(Mat::Identity(3, 3));

  void validate() const {
    if (n < 3) throw std::invalid_argument("need n >= 3");
    if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (inertia.n() != n) throw std::invalid_argument("inertia dimension mismatch");
    if (eta.rows() != n || eta.cols() != n)
      throw std::invalid_argument("eta has wrong size");
    if ((eta + eta.transpose()).norm() > 1e-12 * (1.0 + eta.norm()))
      throw std::invalid_argument("eta must be skew");
    if ((eta * Vec::Unit(n, n - 1)).norm() > 1e-12 * (1.0 + eta.norm()))
      throw std::invalid_argument("eta must annihilate e_n");
  }
};

/// Matrix (son_basis coordinates) of the momentum operator
/// Omega -> I(Omega) + m r^2 (Gamma Omega + Omega Gamma).
inline Mat chapnd_K_operator(const ChapNDParams& p, const Vec& gamma) {
  const int d = son_dim(p.n);
  const Mat Gamma = gamma * gamma.transpose();
  Mat op = p.inertia.coeff_matrix();
  const auto basis = son_basis(p.n);
  const double c = p.mass * p.radius * p.radius;
  for (int j = 0; j < d; ++j)
    op.col(j) += c * son_vectorize(Gamma * basis[j] + basis[j] * Gamma);
  return op;
}

inline Mat omega_from_K_nd(const ChapNDParams& p, const Vec& gamma,
                           const Mat& K) {
  Eigen::LLT<Mat> llt(chapnd_K_operator(p, gamma));
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("contact momentum operator not positive definite");
  return son_unvectorize(llt.solve(son_vectorize(K)), p.n);
}

inline Mat K_from_omega_nd(const ChapNDParams& p, const Vec& gamma,
                           const Mat& Omega) {
  const Mat Gamma = gamma * gamma.transpose();
  return p.inertia.apply(Omega) +
         p.mass * p.radius * p.radius * (Gamma * Omega + Omega * Gamma);
}

// --- full model ---

struct ChapNDFullState {
  Vec x;   // n
  Mat g;   // SO(n)
  Mat K;   // so(n)
};

/// Flat layout [x; row-major g; vec(K)].
inline Vec chapnd_full_pack(const ChapNDFullState& st) {
  const int n = int(st.x.size());
  Vec out(n + n * n + son_dim(n));
  out.head(n) = st.x;
  for (int i = 0; i < n; ++i) out.segment(n + i * n, n) = st.g.row(i);
  out.tail(son_dim(n)) = son_vectorize(st.K);
  return out;
}

inline ChapNDFullState chapnd_full_unpack(const ChapNDParams& p, const Vec& flat) {
  const int n = p.n;
  ChapNDFullState st;
  st.x = flat.head(n);
  st.g.resize(n, n);
  for (int i = 0; i < n; ++i) st.g.row(i) = flat.segment(n + i * n, n).transpose();
  st.K = son_unvectorize(flat.tail(son_dim(n)), n);
  return st;
}

inline int chapnd_full_dim(const ChapNDParams& p) {
  return p.n + p.n * p.n + son_dim(p.n);
}

inline Vec chapnd_gamma(const ChapNDFullState& st) {
  const int n = int(st.x.size());
  return st.g.transpose() * Vec::Unit(n, n - 1);
}

inline ChapNDFullState chapnd_full_vector_field(const ChapNDParams& p,
                                                const ChapNDFullState& st) {
  const Vec gamma = chapnd_gamma(st);
  const Mat Omega = omega_from_K_nd(p, gamma, st.K);

  ChapNDFullState out;
  out.x = p.radius * st.g * (Omega * gamma) + p.eta * st.x;
  out.g = st.g * Omega;
  const Vec eta_xdot_body = st.g.transpose() * (p.eta * out.x);
  out.K = st.K * Omega - Omega * st.K -
          p.mass * p.radius * wedge(eta_xdot_body, gamma);
  return out;
}

inline double chapnd_full_moving_energy(const ChapNDParams& p,
                                        const ChapNDFullState& st) {
  const Vec gamma = chapnd_gamma(st);
  const Mat Omega = omega_from_K_nd(p, gamma, st.K);
  return 0.5 * killing_pair(st.K, Omega) -
         0.5 * p.mass * (p.eta * st.x).squaredNorm();
}

/// Full mechanical energy on the constraint manifold.
inline double chapnd_full_energy(const ChapNDParams& p,
                                 const ChapNDFullState& st) {
  const Vec gamma = chapnd_gamma(st);
  const Mat Omega = omega_from_K_nd(p, gamma, st.K);
  const Vec xdot = p.radius * st.g * (Omega * gamma) + p.eta * st.x;
  const double half_K_omega = 0.5 * killing_pair(st.K, Omega);
  const double spin_part =
      0.5 * p.mass * p.radius * p.radius * (Omega * gamma).squaredNorm();
  return half_K_omega - spin_part + 0.5 * p.mass * xdot.squaredNorm();
}

inline Vec chapnd_full_residuals(const ChapNDParams& p,
                                 const ChapNDFullState& st) {
  Vec r(2);
  r << (st.g.transpose() * st.g - Mat::Identity(p.n, p.n)).norm(),
      st.x[p.n - 1] - p.radius;
  return r;
}

inline ChapNDFullState chapnd_full_project(const ChapNDParams& p,
                                           ChapNDFullState st) {
  st.g = reorthonormalize(st.g);
  st.x[p.n - 1] = p.radius;
  return st;
}

// --- reduced model ---

struct ChapNDReducedState {
  Mat K;      // so(n)
  Vec X;      // n
  Vec gamma;  // n
  Mat Xi;     // so(n)
};

/// Flat layout [vec(K); X; gamma; vec(Xi)].
inline Vec chapnd_reduced_pack(const ChapNDReducedState& st) {
  const int n = int(st.X.size());
  const int d = son_dim(n);
  Vec out(2 * d + 2 * n);
  out.head(d) = son_vectorize(st.K);
  out.segment(d, n) = st.X;
  out.segment(d + n, n) = st.gamma;
  out.tail(d) = son_vectorize(st.Xi);
  return out;
}

inline ChapNDReducedState chapnd_reduced_unpack(const ChapNDParams& p,
                                                const Vec& flat) {
  const int n = p.n;
  const int d = son_dim(n);
  ChapNDReducedState st;
  st.K = son_unvectorize(flat.head(d), n);
  st.X = flat.segment(d, n);
  st.gamma = flat.segment(d + n, n);
  st.Xi = son_unvectorize(flat.tail(d), n);
  return st;
}

inline int chapnd_reduced_dim(const ChapNDParams& p) {
  return 2 * son_dim(p.n) + 2 * p.n;
}

/// Body-frame projection of a full state.
inline ChapNDReducedState chapnd_reduce(const ChapNDParams& p,
                                        const ChapNDFullState& full) {
  ChapNDReducedState st;
  st.K = full.K;
  st.X = full.g.transpose() * full.x;
  st.gamma = chapnd_gamma(full);
  st.Xi = full.g.transpose() * p.eta * full.g;
  st.Xi = 0.5 * (st.Xi - st.Xi.transpose().eval());
  return st;
}

inline ChapNDReducedState chapnd_reduced_vector_field(
    const ChapNDParams& p, const ChapNDReducedState& st) {
  const Mat Omega = omega_from_K_nd(p, st.gamma, st.K);
  const double m = p.mass, r = p.radius;

  auto bracket = [](const Mat& a, const Mat& b) { return Mat(a * b - b * a); };

  ChapNDReducedState out;
  out.K = bracket(st.K, Omega) -
          m * r * r * bracket(st.Xi, wedge(Omega * st.gamma, st.gamma)) -
          m * r * bracket(st.Xi, bracket(st.Xi, wedge(st.X, st.gamma)));
  out.X = (st.Xi - Omega) * st.X + r * Omega * st.gamma;
  out.gamma = -Omega * st.gamma;
  out.Xi = bracket(st.Xi, Omega);
  return out;
}

inline double chapnd_reduced_moving_energy(const ChapNDParams& p,
                                           const ChapNDReducedState& st) {
  const Mat Omega = omega_from_K_nd(p, st.gamma, st.K);
  return 0.5 * killing_pair(st.K, Omega) -
         0.5 * p.mass * (st.Xi * st.X).squaredNorm();
}

inline double chapnd_reduced_energy(const ChapNDParams& p,
                                    const ChapNDReducedState& st) {
  const Mat Omega = omega_from_K_nd(p, st.gamma, st.K);
  const Vec vc = p.radius * Omega * st.gamma + st.Xi * st.X;
  return 0.5 * killing_pair(st.K, Omega) -
         0.5 * p.mass * p.radius * p.radius * (Omega * st.gamma).squaredNorm() +
         0.5 * p.mass * vc.squaredNorm();
}

/// Sorted singular values (used for the isospectrality residual of Xi).
inline Vec sorted_singular_values(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  Vec sv = svd.singularValues();
  std::sort(sv.data(), sv.data() + sv.size());
  return sv;
}

/// Residuals of the reduced invariant manifold:
/// [ |gamma|^2 - 1, gamma.X - r, |Xi gamma|_inf, spectral drift of Xi ].
inline Vec chapnd_reduced_residuals(const ChapNDParams& p,
                                    const ChapNDReducedState& st) {
  Vec r(4);
  r << st.gamma.squaredNorm() - 1.0, st.gamma.dot(st.X) - p.radius,
      (st.Xi * st.gamma).lpNorm<Eigen::Infinity>(),
      (sorted_singular_values(st.Xi) - sorted_singular_values(p.eta))
          .lpNorm<Eigen::Infinity>();
  return r;
}

/// Repair gamma and X; Xi is left untouched (its drift is monitored, not
/// enforced).
inline ChapNDReducedState chapnd_reduced_project(const ChapNDParams& p,
                                                 ChapNDReducedState st) {
  const double nrm = st.gamma.norm();
  if (nrm < 1e-12) throw DegeneracyError("gamma collapsed");
  st.gamma /= nrm;
  st.X += (p.radius - st.gamma.dot(st.X)) * st.gamma;
  return st;
}

}  // namespace nonholo

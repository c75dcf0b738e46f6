#pragma once

// Left-invariant kinetic energy on SO(n) with right-invariant affine
// constraints ("LR" systems).  In body coordinates the data are the inertia
// operator I on so(n), killing-orthonormal elements a^1..a^k fixing the
// constraint distribution, and the affine element zeta = sum_j c_j a^j.
// The trivialized state is (gamma^1..gamma^k, Omega) with
// gamma^j = Ad_{g^{-1}} a^j; the constraints read <gamma^j, Omega> = c_j.
//
// Closed equations of motion:
//   I(Omegadot) = [I(Omega), Omega] + sum_j lambda_j gamma^j
//   gammadot^j  = [gamma^j, Omega]
// with the multipliers solving
//   sum_i <gamma^j, I^{-1}(gamma^i)> lambda_i = -<gamma^j, I^{-1}([I(Omega), Omega])>.
//
// The classical n=3, k=1 case with a^1 = hat(u) is the Veselova system with
// the affine level <gamma, Omega> = c.

#include <Eigen/Dense>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/liegroup.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

struct LRParams {
  int n = 3;
  SonInertia inertia = SonInertia::from_J(Mat::Identity(3, 3));
  std::vector<Mat> a;  // killing-orthonormal so(n) elements (k of them)
  Vec c;               // affine levels; zeta = sum_j c_j a^j

  int k() const { return int(a.size()); }

  Mat zeta() const {
    Mat z = Mat::Zero(n, n);
    for (int j = 0; j < k(); ++j) z += c[j] * a[j];
    return z;
  }

  void validate() const {
    if (n < 3) throw std::invalid_argument("LR system needs n >= 3");
    if (inertia.n() != n) throw std::invalid_argument("inertia dimension mismatch");
    if (a.empty() || int(a.size()) >= son_dim(n))
      throw std::invalid_argument("need 1 <= k < dim so(n) constraint elements");
    if (c.size() != int(a.size()))
      throw std::invalid_argument("affine level count must match k");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].rows() != n || a[i].cols() != n)
        throw std::invalid_argument("constraint element has wrong size");
      if ((a[i] + a[i].transpose()).norm() > 1e-12)
        throw std::invalid_argument("constraint element not skew");
      for (std::size_t j = 0; j <= i; ++j) {
        const double want = (i == j) ? 1.0 : 0.0;
        if (std::abs(killing_pair(a[i], a[j]) - want) > 1e-10)
          throw std::invalid_argument(
              "constraint elements must be killing-orthonormal");
      }
    }
  }
};

/// Trivialized LR state.
struct LRState {
  std::vector<Mat> gamma;
  Mat Omega;
};

/// Flat layout: [vec(gamma^1); ...; vec(gamma^k); vec(Omega)].
inline Vec lr_pack(const LRState& st) {
  const int n = int(st.Omega.rows());
  const int d = son_dim(n);
  Vec out(d * int(st.gamma.size() + 1));
  int at = 0;
  for (const Mat& g : st.gamma) {
    out.segment(at, d) = son_vectorize(g);
    at += d;
  }
  out.segment(at, d) = son_vectorize(st.Omega);
  return out;
}

inline LRState lr_unpack(const LRParams& p, const Vec& flat) {
  const int d = son_dim(p.n);
  LRState st;
  st.gamma.reserve(p.k());
  int at = 0;
  for (int j = 0; j < p.k(); ++j) {
    st.gamma.push_back(son_unvectorize(flat.segment(at, d), p.n));
    at += d;
  }
  st.Omega = son_unvectorize(flat.segment(at, d), p.n);
  return st;
}

inline int lr_flat_dim(const LRParams& p) { return son_dim(p.n) * (p.k() + 1); }

/// Initial trivialized state at attitude g with body velocity Omega:
/// gamma^j = Ad_{g^{-1}} a^j.
inline LRState lr_state_at(const LRParams& p, const Mat& g, const Mat& Omega) {
  LRState st;
  const Mat ginv = g.transpose();
  for (const Mat& aj : p.a) st.gamma.push_back(adjoint(ginv, aj));
  st.Omega = Omega;
  return st;
}

/// Right-hand side of the trivialized equations of motion.
inline LRState lr_vector_field(const LRParams& p, const LRState& st) {
  const int k = p.k();
  const Mat IOm = p.inertia.apply(st.Omega);
  const Mat torque = IOm * st.Omega - st.Omega * IOm;  // [I(Omega), Omega]

  std::vector<Mat> Iinv_gamma(k);
  for (int j = 0; j < k; ++j) Iinv_gamma[j] = p.inertia.solve(st.gamma[j]);

  Mat G(k, k);
  Vec rhs(k);
  const Mat Iinv_torque = p.inertia.solve(torque);
  for (int j = 0; j < k; ++j) {
    rhs[j] = -killing_pair(st.gamma[j], Iinv_torque);
    for (int i = 0; i < k; ++i)
      G(j, i) = killing_pair(st.gamma[j], Iinv_gamma[i]);
  }
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("LR multiplier matrix singular");
  const Vec lambda = llt.solve(rhs);

  Mat force = torque;
  for (int j = 0; j < k; ++j) force += lambda[j] * st.gamma[j];

  LRState out;
  out.Omega = p.inertia.solve(force);
  out.gamma.reserve(k);
  for (int j = 0; j < k; ++j)
    out.gamma.push_back(st.gamma[j] * st.Omega - st.Omega * st.gamma[j]);
  return out;
}

inline Vec lr_vector_field_flat(const LRParams& p, const Vec& flat) {
  return lr_pack(lr_vector_field(p, lr_unpack(p, flat)));
}

/// Reduced kinetic energy (the full energy restricted to the group).
inline double lr_energy(const LRParams& p, const LRState& st) {
  return 0.5 * killing_pair(p.inertia.apply(st.Omega), st.Omega);
}

/// Moving energy of the right-invariant generator with value zeta:
/// E = T - <I(Omega), Ad_{g^{-1}} zeta> = T - sum_j c_j <I(Omega), gamma^j>.
inline double lr_moving_energy(const LRParams& p, const LRState& st) {
  const Mat IOm = p.inertia.apply(st.Omega);
  double e = 0.5 * killing_pair(IOm, st.Omega);
  for (int j = 0; j < p.k(); ++j)
    e -= p.c[j] * killing_pair(IOm, st.gamma[j]);
  return e;
}

/// Momentum of the right-invariant field generated by xi in so(n):
/// J_xi = <I(Omega), Ad_{g^{-1}} xi>; the trivialized state carries
/// Ad_{g^{-1}} xi only for xi in span(a^j), so the caller passes it directly.
inline double lr_momentum(const LRParams& p, const LRState& st,
                          const Mat& xi_body) {
  return killing_pair(p.inertia.apply(st.Omega), xi_body);
}

/// Constraint levels <gamma^j, Omega> - c_j.
inline Vec lr_constraint_residual(const LRParams& p, const LRState& st) {
  Vec r(p.k());
  for (int j = 0; j < p.k(); ++j)
    r[j] = killing_pair(st.gamma[j], st.Omega) - p.c[j];
  return r;
}

/// Gram defects <gamma^i, gamma^j> - delta_ij (gammas stay orthonormal
/// because they evolve by the adjoint action).
inline Mat lr_gram_residual(const LRParams& p, const LRState& st) {
  Mat r(p.k(), p.k());
  for (int i = 0; i < p.k(); ++i)
    for (int j = 0; j < p.k(); ++j)
      r(i, j) = killing_pair(st.gamma[i], st.gamma[j]) - (i == j ? 1.0 : 0.0);
  return r;
}

/// Invariant-manifold repair: killing-orthonormalize the gammas, then shift
/// Omega by I^{-1}(gamma) directions (the kinetic-metric-orthogonal
/// correction) so the affine levels hold exactly.
inline LRState lr_project(const LRParams& p, LRState st) {
  const int k = p.k();
  // Gram-Schmidt in the killing inner product.
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j)
      st.gamma[i] -= killing_pair(st.gamma[i], st.gamma[j]) * st.gamma[j];
    const double nrm = killing_norm(st.gamma[i]);
    if (nrm < 1e-12) throw DegeneracyError("degenerate gamma frame");
    st.gamma[i] /= nrm;
  }
  Mat G(k, k);
  Vec resid(k);
  std::vector<Mat> Iinv_gamma(k);
  for (int j = 0; j < k; ++j) Iinv_gamma[j] = p.inertia.solve(st.gamma[j]);
  for (int j = 0; j < k; ++j) {
    resid[j] = p.c[j] - killing_pair(st.gamma[j], st.Omega);
    for (int i = 0; i < k; ++i)
      G(j, i) = killing_pair(st.gamma[j], Iinv_gamma[i]);
  }
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("LR projector matrix singular");
  const Vec mu = llt.solve(resid);
  for (int j = 0; j < k; ++j) st.Omega += mu[j] * Iinv_gamma[j];
  return st;
}

/// Convenience constructor for the affine Veselova system: n=3, one
/// constraint row about the unit axis u, level c.
inline LRParams veselova_params(const Eigen::Matrix3d& vector_inertia_tensor,
                                double c,
                                const Eigen::Vector3d& u = Eigen::Vector3d::UnitZ()) {
  if (std::abs(u.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("constraint axis must be a unit vector");
  // Translate the classical 3x3 tensor into the mass form J with
  // I3 = tr(J) Id - J, i.e. J = tr(I3)/2 Id - I3.
  const Eigen::Matrix3d J =
      0.5 * vector_inertia_tensor.trace() * Eigen::Matrix3d::Identity() -
      vector_inertia_tensor;
  LRParams p;
  p.n = 3;
  p.inertia = SonInertia::from_J(J);
  p.a = {Mat(hat(u))};
  p.c = Vec::Constant(1, c);
  p.validate();
  return p;
}

}  // namespace nonholo

#pragma once

// Convex rigid body rolling without sliding on a horizontal plane that spins
// about a fixed vertical axis with constant rate kappa.  Reduced coordinates
// (all in the body frame):
//   gamma  -- vertical axis, gammadot = gamma x Omega
//   rho    -- contact-to-center vector, rho = F(gamma) with DF its gradient
//   K      -- angular momentum about the contact point:
//             K = I Omega + m rho x (Omega x rho)
//   X      -- body representative of the center position, Xdot = (X - rho) x (Omega - kappa gamma)
// and the momentum equation
//   Kdot = K x Omega + m rhodot x (Omega x rho) + m G gamma x rho
//          + m kappa rho x (kappa X - rhodot x gamma).
//
// The vertical-axis generator has moving energy
//   E = 1/2 K.Omega + m G rho.gamma - kappa K.gamma
//       + 1/2 m kappa^2 (|rho|^2 - |X|^2),
// a first integral for every convex shape and every kappa.
//
// The homogeneous-plane special case rho = r gamma (ball) is also provided in
// the streamlined form used for the rotating-plane ball:
//   Kdot = K x Omega - m r^2 kappa gamma x Omega + m r kappa^2 gamma x X
//   Xdot = (kappa gamma - Omega) x X + r Omega x gamma
// with the simpler integral  Etilde = 1/2 K.Omega - 1/2 m kappa^2 |X|^2
// and the conserved vertical momentum K.gamma.

#include <Eigen/Dense>
#include <cmath>

#include "nonholo/errors.hpp"
#include "nonholo/liegroup.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

using Eigen::Matrix3d;
using Eigen::Vector3d;

struct RollingBodyParams {
  enum class Shape { sphere, ellipsoid };

  double mass = 1.0;
  double gravity = 9.81;
  Matrix3d inertia = Matrix3d::Identity();  // classical 3x3 tensor
  double kappa = 0.0;                       // plane spin rate
  Shape shape = Shape::sphere;
  double radius = 1.0;       // sphere
  Vector3d semi_axes{1, 1, 1};  // ellipsoid

  void validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
    if (!(gravity >= 0.0)) throw std::invalid_argument("gravity must be >= 0");
    Eigen::LLT<Matrix3d> llt(inertia);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("inertia tensor must be positive definite");
    if (shape == Shape::sphere) {
      if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    } else {
      if (!(semi_axes.minCoeff() > 0.0))
        throw std::invalid_argument("semi-axes must be positive");
    }
  }
};

/// Contact map F: unit vertical gamma -> contact-to-center vector rho.
/// Sphere: rho = r gamma.  Ellipsoid with semi-axes a_i: with E = diag(a_i^-2),
/// rho = E^{-1} gamma / sqrt(gamma . E^{-1} gamma).
inline Vector3d shape_F(const RollingBodyParams& p, const Vector3d& gamma) {
  if (p.shape == RollingBodyParams::Shape::sphere) return p.radius * gamma;
  const Vector3d u = p.semi_axes.array().square().matrix().asDiagonal() * gamma;
  const double w = std::sqrt(gamma.dot(u));
  return u / w;
}

/// Gradient DF of the contact map.
inline Matrix3d shape_DF(const RollingBodyParams& p, const Vector3d& gamma) {
  if (p.shape == RollingBodyParams::Shape::sphere)
    return p.radius * Matrix3d::Identity();
  const Matrix3d Einv = p.semi_axes.array().square().matrix().asDiagonal();
  const Vector3d u = Einv * gamma;
  const double w = std::sqrt(gamma.dot(u));
  return Einv / w - (u * u.transpose()) / (w * w * w);
}

struct RollingBodyState {
  Vector3d K;
  Vector3d X;
  Vector3d gamma;
};

/// Flat layout [K; X; gamma].
inline Vec rolling_pack(const RollingBodyState& st) {
  Vec out(9);
  out << st.K, st.X, st.gamma;
  return out;
}

inline RollingBodyState rolling_unpack(const Vec& flat) {
  return {flat.segment<3>(0), flat.segment<3>(3), flat.segment<3>(6)};
}

/// Contact angular momentum K = I Omega + m rho x (Omega x rho).
inline Vector3d K_from_omega(const RollingBodyParams& p, const Vector3d& gamma,
                             const Vector3d& omega) {
  const Vector3d rho = shape_F(p, gamma);
  return p.inertia * omega + p.mass * rho.cross(omega.cross(rho));
}

/// Invert K = I Omega + m rho x (Omega x rho) for Omega:
/// with W = (I + m |rho|^2 Id)^{-1},
///   Omega = W K + m (W rho . K) / (1 - m (W rho . rho)) W rho.
inline Vector3d omega_from_K(const RollingBodyParams& p, const Vector3d& gamma,
                             const Vector3d& K) {
  const Vector3d rho = shape_F(p, gamma);
  const Matrix3d W_inv =
      p.inertia + p.mass * rho.squaredNorm() * Matrix3d::Identity();
  Eigen::LLT<Matrix3d> llt(W_inv);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("contact momentum operator not positive definite");
  const Vector3d WK = llt.solve(K);
  const Vector3d Wrho = llt.solve(rho);
  const double denom = 1.0 - p.mass * Wrho.dot(rho);
  if (std::abs(denom) < 1e-12)
    throw DegeneracyError("contact momentum inversion degenerate");
  return WK + (p.mass * Wrho.dot(K) / denom) * Wrho;
}

/// Right-hand side of the reduced equations for a general convex shape.
inline RollingBodyState rolling_body_vector_field(const RollingBodyParams& p,
                                                  const RollingBodyState& st) {
  const Vector3d rho = shape_F(p, st.gamma);
  const Vector3d omega = omega_from_K(p, st.gamma, st.K);
  const Vector3d gammadot = st.gamma.cross(omega);
  const Vector3d rhodot = shape_DF(p, st.gamma) * gammadot;

  RollingBodyState out;
  out.K = st.K.cross(omega) + p.mass * rhodot.cross(omega.cross(rho)) +
          p.mass * p.gravity * st.gamma.cross(rho) +
          p.mass * p.kappa *
              rho.cross(p.kappa * st.X - rhodot.cross(st.gamma));
  out.X = (st.X - rho).cross(omega - p.kappa * st.gamma);
  out.gamma = gammadot;
  return out;
}

/// Moving energy of the vertical-axis generator (conserved for any shape).
inline double rolling_body_moving_energy(const RollingBodyParams& p,
                                         const RollingBodyState& st) {
  const Vector3d rho = shape_F(p, st.gamma);
  const Vector3d omega = omega_from_K(p, st.gamma, st.K);
  return 0.5 * st.K.dot(omega) + p.mass * p.gravity * rho.dot(st.gamma) -
         p.kappa * st.K.dot(st.gamma) +
         0.5 * p.mass * p.kappa * p.kappa *
             (rho.squaredNorm() - st.X.squaredNorm());
}

/// Mechanical energy restricted to the constraint manifold, in reduced
/// variables: the center velocity there is g (Omega x rho + kappa gamma x (X - rho)).
inline double rolling_body_energy(const RollingBodyParams& p,
                                  const RollingBodyState& st) {
  const Vector3d rho = shape_F(p, st.gamma);
  const Vector3d omega = omega_from_K(p, st.gamma, st.K);
  const Vector3d vc =
      omega.cross(rho) + p.kappa * st.gamma.cross(st.X - rho);
  return 0.5 * omega.dot(p.inertia * omega) + 0.5 * p.mass * vc.squaredNorm() +
         p.mass * p.gravity * st.gamma.dot(rho);
}

/// Residuals of the invariant relations |gamma| = 1 and gamma.(X - rho) = 0.
inline Vec rolling_body_residuals(const RollingBodyParams& p,
                                  const RollingBodyState& st) {
  const Vector3d rho = shape_F(p, st.gamma);
  Vec r(2);
  r << st.gamma.squaredNorm() - 1.0, st.gamma.dot(st.X - rho);
  return r;
}

/// Invariant-manifold repair: normalize gamma and correct X along gamma only.
inline RollingBodyState rolling_body_project(const RollingBodyParams& p,
                                             RollingBodyState st) {
  const double nrm = st.gamma.norm();
  if (nrm < 1e-12) throw DegeneracyError("gamma collapsed");
  st.gamma /= nrm;
  const Vector3d rho = shape_F(p, st.gamma);
  st.X += (st.gamma.dot(rho) - st.gamma.dot(st.X)) * st.gamma;
  return st;
}

// --- homogeneous-plane ball specialization (rho = r gamma) ---

/// Streamlined rotating-plane ball field; requires the sphere shape.
inline RollingBodyState chap3d_vector_field(const RollingBodyParams& p,
                                            const RollingBodyState& st) {
  if (p.shape != RollingBodyParams::Shape::sphere)
    throw std::invalid_argument("ball field needs the sphere shape");
  const double r = p.radius;
  const Vector3d omega = omega_from_K(p, st.gamma, st.K);
  RollingBodyState out;
  out.K = st.K.cross(omega) -
          p.mass * r * r * p.kappa * st.gamma.cross(omega) +
          p.mass * r * p.kappa * p.kappa * st.gamma.cross(st.X);
  out.X = (p.kappa * st.gamma - omega).cross(st.X) + r * omega.cross(st.gamma);
  out.gamma = st.gamma.cross(omega);
  return out;
}

/// The ball's reduced integral Etilde = 1/2 K.Omega - 1/2 m kappa^2 |X|^2.
/// It differs from the general moving energy by the conserved combination
/// m G r + 1/2 m kappa^2 r^2 - kappa (K.gamma).
inline double chap3d_tilde_energy(const RollingBodyParams& p,
                                  const RollingBodyState& st) {
  const Vector3d omega = omega_from_K(p, st.gamma, st.K);
  return 0.5 * st.K.dot(omega) -
         0.5 * p.mass * p.kappa * p.kappa * st.X.squaredNorm();
}

/// Vertical momentum K.gamma (conserved for the ball).
inline double chap3d_vertical_momentum(const RollingBodyState& st) {
  return st.K.dot(st.gamma);
}

}  // namespace nonholo

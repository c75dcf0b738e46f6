#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "nonholo/errors.hpp"

namespace nonholo {
namespace zyz {

// ZYZ Euler chart on SO(3): g(phi, theta, psi) = Rz(phi) Ry(theta) Rz(psi).
// Singular where sin(theta) = 0.  Angle order in all arrays: (phi, theta, psi).

using Eigen::Matrix3d;
using Eigen::Vector3d;

inline Matrix3d Rz(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

inline Matrix3d Ry(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

inline Matrix3d dRz(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return m;
}

inline Matrix3d dRy(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return m;
}

inline Matrix3d attitude(const Vector3d& a) {
  return Rz(a[0]) * Ry(a[1]) * Rz(a[2]);
}

inline std::array<Matrix3d, 3> attitude_partials(const Vector3d& a) {
  return {dRz(a[0]) * Ry(a[1]) * Rz(a[2]),
          Rz(a[0]) * dRy(a[1]) * Rz(a[2]),
          Rz(a[0]) * Ry(a[1]) * dRz(a[2])};
}

/// Body angular velocity matrix: Omega = B(a) adot, columns (phi, theta, psi).
inline Matrix3d body_rates(const Vector3d& a) {
  const double st = std::sin(a[1]), ct = std::cos(a[1]);
  const double sp = std::sin(a[2]), cp = std::cos(a[2]);
  Matrix3d b;
  b << -st * cp, sp, 0,
        st * sp, cp, 0,
        ct,      0,  1;
  return b;
}

inline std::array<Matrix3d, 3> body_rates_partials(const Vector3d& a) {
  const double st = std::sin(a[1]), ct = std::cos(a[1]);
  const double sp = std::sin(a[2]), cp = std::cos(a[2]);
  Matrix3d d_theta, d_psi;
  d_theta << -ct * cp, 0, 0,
              ct * sp, 0, 0,
             -st,      0, 0;
  d_psi << st * sp,  cp, 0,
           st * cp, -sp, 0,
           0,        0,  0;
  return {Matrix3d::Zero(), d_theta, d_psi};
}

/// Body-frame representative of the vertical axis: gamma = g^T e3.
inline Vector3d poisson(const Vector3d& a) {
  const double st = std::sin(a[1]), ct = std::cos(a[1]);
  const double sp = std::sin(a[2]), cp = std::cos(a[2]);
  return {-st * cp, st * sp, ct};
}

inline std::array<Vector3d, 3> poisson_partials(const Vector3d& a) {
  const double st = std::sin(a[1]), ct = std::cos(a[1]);
  const double sp = std::sin(a[2]), cp = std::cos(a[2]);
  return {Vector3d::Zero(),
          Vector3d{-ct * cp, ct * sp, -st},
          Vector3d{st * sp, st * cp, 0.0}};
}

/// Recover (phi, theta, psi) with theta in (0, pi) from a rotation matrix.
inline Vector3d angles_from_attitude(const Matrix3d& g) {
  const double st = std::hypot(g(0, 2), g(1, 2));
  if (st < 1e-10)
    throw ChartSingularityError("attitude at ZYZ chart singularity");
  const double theta = std::atan2(st, g(2, 2));
  const double phi = std::atan2(g(1, 2), g(0, 2));
  const double psi = std::atan2(g(2, 1), -g(2, 0));
  return {phi, theta, psi};
}

/// Guard used by chart callbacks: reject configurations too close to the
/// gimbal singularity for the derivative formulas to stay well conditioned.
inline void require_nonsingular(double theta, double min_sin = 1e-2) {
  if (std::abs(std::sin(theta)) < min_sin)
    throw ChartSingularityError("configuration too close to ZYZ singularity");
}

}  // namespace zyz
}  // namespace nonholo

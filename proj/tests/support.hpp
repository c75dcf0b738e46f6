#pragma once

// Shared fixtures for the unit tests: small analytic systems with known
// closed-form pieces, used to pin oracle values and to cross-check the
// finite-difference fallbacks against hand-coded derivatives.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "nonholo/core_dynamics.hpp"
#include "nonholo/rng.hpp"
#include "nonholo/system.hpp"

namespace testsupport {

using nonholo::Mat;
using nonholo::MechanicalSystem;
using nonholo::State;
using nonholo::Vec;

constexpr std::uint64_t kSeed = 1234567;

/// Planar heavy particle, unit mass and gravity, constraint qd0 + qd1 = 1.
inline MechanicalSystem heavy_particle() {
  MechanicalSystem sys;
  sys.n = 2;
  sys.k = 1;
  sys.A = [](const Vec&) { return Mat::Identity(2, 2); };
  sys.V = [](const Vec& q) { return q[1]; };
  sys.S = [](const Vec&) { return Mat::Ones(1, 2); };
  sys.s = [](const Vec&) { return Vec::Constant(1, -1.0); };
  return sys;
}

/// Smooth four-dimensional system with two affine constraint rows.  All
/// derivative callbacks have hand-coded closed forms; pass analytic=false to
/// exercise the finite-difference fallbacks on identical formulas.
inline MechanicalSystem smooth_system(bool analytic = true) {
  MechanicalSystem sys;
  sys.n = 4;
  sys.k = 2;

  static const Mat A0 = (Eigen::Vector4d(2.0, 2.5, 3.0, 3.5)).asDiagonal();
  static const std::vector<Mat> C = [] {
    std::vector<Mat> c(4, Mat::Zero(4, 4));
    c[0](0, 1) = c[0](1, 0) = 0.2;
    c[0](0, 0) = 0.1;
    c[1](1, 2) = c[1](2, 1) = 0.15;
    c[2](2, 3) = c[2](3, 2) = 0.1;
    c[2](3, 3) = 0.05;
    c[3](0, 3) = c[3](3, 0) = 0.12;
    return c;
  }();
  static const Eigen::Vector4d Kdiag(1.0, 0.5, 0.25, 0.75);

  sys.A = [](const Vec& q) {
    Mat a = A0;
    for (int j = 0; j < 4; ++j) a += std::sin(q[j]) * C[j];
    return a;
  };
  sys.b = [](const Vec& q) {
    Vec b(4);
    b << 0.3 * std::sin(q[1]), 0.2 * q[0], -0.1 * std::cos(q[2]), 0.05 * q[3];
    return b;
  };
  sys.V = [](const Vec& q) {
    return 0.5 * q.dot(Kdiag.asDiagonal() * q) + 0.3 * std::cos(q[0]);
  };
  sys.S = [](const Vec& q) {
    Mat s = Mat::Zero(2, 4);
    s(0, 0) = 1.0;
    s(1, 1) = 1.0;
    s(0, 2) = 0.4 * std::sin(q[3]);
    s(0, 3) = 0.2 * q[0];
    s(1, 2) = 0.3 * std::cos(q[0]);
    s(1, 3) = 1.0 + 0.1 * std::sin(q[1]);
    return s;
  };
  sys.s = [](const Vec& q) {
    Vec v(2);
    v << 0.5 + 0.1 * q[2], -0.3 * std::sin(q[0]);
    return v;
  };

  if (analytic) {
    sys.dA = [](const Vec& q) {
      std::vector<Mat> d(4);
      for (int j = 0; j < 4; ++j) d[j] = std::cos(q[j]) * C[j];
      return d;
    };
    sys.db = [](const Vec& q) {
      Mat d = Mat::Zero(4, 4);
      d(0, 1) = 0.3 * std::cos(q[1]);
      d(1, 0) = 0.2;
      d(2, 2) = 0.1 * std::sin(q[2]);
      d(3, 3) = 0.05;
      return d;
    };
    sys.dV = [](const Vec& q) {
      Vec d = Kdiag.asDiagonal() * q;
      d[0] -= 0.3 * std::sin(q[0]);
      return d;
    };
    sys.dS = [](const Vec& q) {
      std::vector<Mat> d(4, Mat::Zero(2, 4));
      d[0](0, 3) = 0.2;
      d[0](1, 2) = -0.3 * std::sin(q[0]);
      d[1](1, 3) = 0.1 * std::cos(q[1]);
      d[3](0, 2) = 0.4 * std::cos(q[3]);
      return d;
    };
    sys.ds = [](const Vec& q) {
      Mat d = Mat::Zero(2, 4);
      d(0, 2) = 0.1;
      d(1, 0) = -0.3 * std::cos(q[0]);
      return d;
    };
  }
  return sys;
}

inline State random_state(const MechanicalSystem& sys, nonholo::Rng& rng,
                          double scale = 1.0) {
  State st;
  st.q = rng.box(Vec::Zero(sys.n), scale);
  st.qdot = rng.box(Vec::Zero(sys.n), scale);
  return st;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const auto n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testsupport

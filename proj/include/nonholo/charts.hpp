#pragma once

// Coordinate-chart realizations of the trivialized models as plain
// MechanicalSystem instances, used to cross-validate the reduced vector
// fields against the generic reaction-force dynamics.  Attitudes use the ZYZ
// Euler chart; all derivative callbacks are hand-coded so agreement tests are
// not limited by finite-difference noise.
//
// Chart layouts:
//   Veselova (LR on SO(3), one affine row):   q = (phi, theta, psi)
//   Rolling body / rotating-plane ball:       q = (x1, x2, phi, theta, psi)

#include <Eigen/Dense>
#include <array>

#include "nonholo/core_dynamics.hpp"
#include "nonholo/euler_zyz.hpp"
#include "nonholo/liegroup.hpp"
#include "nonholo/lr_system.hpp"
#include "nonholo/rolling_body.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

// ---------------------------------------------------------------------------
// Veselova chart
// ---------------------------------------------------------------------------

class VeselovaChart {
 public:
  explicit VeselovaChart(const LRParams& p) : params_(p) {
    p.validate();
    if (p.n != 3 || p.k() != 1)
      throw std::invalid_argument("chart needs the n=3, k=1 system");
    I3_ = vector_inertia(p.inertia);
    axis_ = unhat(p.a[0]);
    c_ = p.c[0];
  }

  const LRParams& params() const { return params_; }
  const Matrix3d& vector_inertia_tensor() const { return I3_; }

  /// The chart system: A = B^T I3 B, one row S = (g^T u)^T B, s = (-c).
  MechanicalSystem system() const {
    MechanicalSystem sys;
    sys.n = 3;
    sys.k = 1;
    const Matrix3d I3 = I3_;
    const Vector3d u = axis_;
    const double c = c_;

    sys.A = [I3](const Vec& q) {
      zyz::require_nonsingular(q[1]);
      const Matrix3d B = zyz::body_rates(q);
      return Mat(B.transpose() * I3 * B);
    };
    sys.dA = [I3](const Vec& q) {
      zyz::require_nonsingular(q[1]);
      const Matrix3d B = zyz::body_rates(q);
      const auto dB = zyz::body_rates_partials(q);
      std::vector<Mat> out(3);
      for (int i = 0; i < 3; ++i)
        out[i] = dB[i].transpose() * I3 * B + B.transpose() * I3 * dB[i];
      return out;
    };
    sys.S = [u](const Vec& q) {
      zyz::require_nonsingular(q[1]);
      const Vector3d gamma_u = zyz::attitude(q).transpose() * u;
      return Mat(gamma_u.transpose() * zyz::body_rates(q));
    };
    sys.dS = [u](const Vec& q) {
      const Matrix3d B = zyz::body_rates(q);
      const auto dB = zyz::body_rates_partials(q);
      const auto dg = zyz::attitude_partials(q);
      const Vector3d gamma_u = zyz::attitude(q).transpose() * u;
      std::vector<Mat> out(3);
      for (int i = 0; i < 3; ++i) {
        const Vector3d dgamma_u = dg[i].transpose() * u;
        out[i] = dgamma_u.transpose() * B + gamma_u.transpose() * dB[i];
      }
      return out;
    };
    sys.s = [c](const Vec&) { return Vec::Constant(1, -c); };
    sys.ds = [](const Vec&) { return Mat::Zero(1, 3); };
    return sys;
  }

  /// Trivialized state of a chart point.
  LRState to_lr(const State& st) const {
    const Matrix3d g = zyz::attitude(st.q);
    const Vector3d omega = zyz::body_rates(st.q) * Vector3d(st.qdot);
    return lr_state_at(params_, g, hat(omega));
  }

  /// Push a chart acceleration forward to the trivialized derivative.
  LRState field_pushforward(const State& st, const Vec& qddot) const {
    const Matrix3d B = zyz::body_rates(st.q);
    const auto dB = zyz::body_rates_partials(st.q);
    const Vector3d adot(st.qdot);
    Matrix3d Bdot = Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) Bdot += adot[i] * dB[i];
    const Vector3d omega = B * adot;
    const Vector3d omegadot = B * Vector3d(qddot) + Bdot * adot;
    const Vector3d gamma_u = zyz::attitude(st.q).transpose() * axis_;

    LRState out;
    out.gamma = {Mat(hat(gamma_u.cross(omega)))};
    out.Omega = hat(omegadot);
    return out;
  }

  /// On-manifold chart state with attitude angles and body angular velocity;
  /// the velocity is shifted (kinetic-metric-orthogonally) onto the affine
  /// constraint level first.
  State chart_state(const Vector3d& angles, Vector3d omega) const {
    zyz::require_nonsingular(angles[1], 0.05);
    const Vector3d gamma_u = zyz::attitude(angles).transpose() * axis_;
    const Vector3d Iinv_gamma = I3_.llt().solve(gamma_u);
    omega += ((c_ - gamma_u.dot(omega)) / gamma_u.dot(Iinv_gamma)) * Iinv_gamma;
    State st;
    st.q = angles;
    st.qdot = zyz::body_rates(angles).colPivHouseholderQr().solve(omega);
    return st;
  }

  /// Chart expression of the right-invariant field generated by hat(w):
  /// Y(q) = B(q)^{-1} g(q)^T w.
  VectorFieldOnQ spatial_rotation_field(const Vector3d& w) const {
    VectorFieldOnQ Y;
    Y.value = [w](const Vec& q) {
      zyz::require_nonsingular(q[1]);
      const Vector3d gw = zyz::attitude(q).transpose() * w;
      return Vec(zyz::body_rates(q).colPivHouseholderQr().solve(gw));
    };
    Y.jacobian = [w](const Vec& q) {
      zyz::require_nonsingular(q[1]);
      const Matrix3d Binv = zyz::body_rates(q).inverse();
      const auto dB = zyz::body_rates_partials(q);
      const auto dg = zyz::attitude_partials(q);
      const Vector3d gw = zyz::attitude(q).transpose() * w;
      Mat out(3, 3);
      for (int i = 0; i < 3; ++i)
        out.col(i) =
            Binv * (dg[i].transpose() * w) - Binv * dB[i] * Binv * gw;
      return out;
    };
    return Y;
  }

  /// The constraint's own generator: rotation about the axis at rate c.
  VectorFieldOnQ generator_field() const {
    return spatial_rotation_field(c_ * axis_);
  }

 private:
  LRParams params_;
  Matrix3d I3_;
  Vector3d axis_;
  double c_ = 0.0;
};

// ---------------------------------------------------------------------------
// Rolling-body chart (also serves the rotating-plane ball)
// ---------------------------------------------------------------------------

class RollingChart {
 public:
  explicit RollingChart(const RollingBodyParams& p) : params_(p) {
    p.validate();
  }

  const RollingBodyParams& params() const { return params_; }

  MechanicalSystem system() const {
    MechanicalSystem sys;
    sys.n = 5;
    sys.k = 2;
    const RollingBodyParams P = params_;

    auto angles = [](const Vec& q) { return Vector3d(q[2], q[3], q[4]); };

    sys.A = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      zyz::require_nonsingular(a[1]);
      const Matrix3d B = zyz::body_rates(a);
      const Vector3d gamma = zyz::poisson(a);
      const Vector3d w = shape_F(P, gamma).cross(gamma);
      const Matrix3d M = P.inertia + P.mass * w * w.transpose();
      Mat A = Mat::Zero(5, 5);
      A(0, 0) = A(1, 1) = P.mass;
      A.block<3, 3>(2, 2) = B.transpose() * M * B;
      return A;
    };
    sys.dA = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      zyz::require_nonsingular(a[1]);
      const Matrix3d B = zyz::body_rates(a);
      const auto dB = zyz::body_rates_partials(a);
      const Vector3d gamma = zyz::poisson(a);
      const auto dgamma = zyz::poisson_partials(a);
      const Vector3d rho = shape_F(P, gamma);
      const Matrix3d DF = shape_DF(P, gamma);
      const Vector3d w = rho.cross(gamma);
      const Matrix3d M = P.inertia + P.mass * w * w.transpose();

      std::vector<Mat> out(5, Mat::Zero(5, 5));
      for (int i = 0; i < 3; ++i) {
        const Vector3d drho = DF * dgamma[i];
        const Vector3d dw = drho.cross(gamma) + rho.cross(dgamma[i]);
        const Matrix3d dM =
            P.mass * (dw * w.transpose() + w * dw.transpose());
        out[2 + i].block<3, 3>(2, 2) = dB[i].transpose() * M * B +
                                       B.transpose() * dM * B +
                                       B.transpose() * M * dB[i];
      }
      return out;
    };

    sys.V = [P, angles](const Vec& q) {
      const Vector3d gamma = zyz::poisson(angles(q));
      return P.mass * P.gravity * gamma.dot(shape_F(P, gamma));
    };
    sys.dV = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      const Vector3d gamma = zyz::poisson(a);
      const auto dgamma = zyz::poisson_partials(a);
      const Vector3d rho = shape_F(P, gamma);
      const Matrix3d DF = shape_DF(P, gamma);
      Vec out = Vec::Zero(5);
      for (int i = 0; i < 3; ++i)
        out[2 + i] = P.mass * P.gravity *
                     (dgamma[i].dot(rho) + gamma.dot(DF * dgamma[i]));
      return out;
    };

    sys.S = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      zyz::require_nonsingular(a[1]);
      const Matrix3d g = zyz::attitude(a);
      const Matrix3d B = zyz::body_rates(a);
      const Vector3d gamma = zyz::poisson(a);
      const Matrix3d C = g * hat(shape_F(P, gamma)) * B;
      Mat S = Mat::Zero(2, 5);
      S(0, 0) = S(1, 1) = 1.0;
      S.block<2, 3>(0, 2) = C.topRows<2>();
      return S;
    };
    sys.dS = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      const Matrix3d g = zyz::attitude(a);
      const auto dg = zyz::attitude_partials(a);
      const Matrix3d B = zyz::body_rates(a);
      const auto dB = zyz::body_rates_partials(a);
      const Vector3d gamma = zyz::poisson(a);
      const auto dgamma = zyz::poisson_partials(a);
      const Vector3d rho = shape_F(P, gamma);
      const Matrix3d DF = shape_DF(P, gamma);

      std::vector<Mat> out(5, Mat::Zero(2, 5));
      for (int i = 0; i < 3; ++i) {
        const Vector3d drho = DF * dgamma[i];
        const Matrix3d dC = dg[i] * hat(rho) * B + g * hat(drho) * B +
                            g * hat(rho) * dB[i];
        out[2 + i].block<2, 3>(0, 2) = dC.topRows<2>();
      }
      return out;
    };

    sys.s = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      const Vector3d gamma = zyz::poisson(a);
      const Vector3d grho = zyz::attitude(a) * shape_F(P, gamma);
      Vec s(2);
      s << P.kappa * (q[1] - grho[1]), -P.kappa * (q[0] - grho[0]);
      return s;
    };
    sys.ds = [P, angles](const Vec& q) {
      const Vector3d a = angles(q);
      const Matrix3d g = zyz::attitude(a);
      const auto dg = zyz::attitude_partials(a);
      const Vector3d gamma = zyz::poisson(a);
      const auto dgamma = zyz::poisson_partials(a);
      const Vector3d rho = shape_F(P, gamma);
      const Matrix3d DF = shape_DF(P, gamma);

      Mat out = Mat::Zero(2, 5);
      out(0, 1) = P.kappa;
      out(1, 0) = -P.kappa;
      for (int i = 0; i < 3; ++i) {
        const Vector3d dgrho = dg[i] * rho + g * (DF * dgamma[i]);
        out(0, 2 + i) = -P.kappa * dgrho[1];
        out(1, 2 + i) = P.kappa * dgrho[0];
      }
      return out;
    };
    return sys;
  }

  /// Reduced variables of a chart point.
  RollingBodyState to_reduced(const State& st) const {
    const Vector3d a(st.q[2], st.q[3], st.q[4]);
    const Matrix3d g = zyz::attitude(a);
    const Vector3d gamma = zyz::poisson(a);
    const Vector3d rho = shape_F(params_, gamma);
    const Vector3d omega = zyz::body_rates(a) * Vector3d(st.qdot.tail<3>());
    RollingBodyState out;
    out.gamma = gamma;
    out.K = K_from_omega(params_, gamma, omega);
    out.X = g.transpose() * Vector3d(st.q[0], st.q[1], gamma.dot(rho));
    return out;
  }

  /// Push a chart acceleration forward to the reduced derivative (Kdot, Xdot,
  /// gammadot).
  RollingBodyState field_pushforward(const State& st, const Vec& qddot) const {
    const Vector3d a(st.q[2], st.q[3], st.q[4]);
    const Vector3d adot(st.qdot.tail<3>());
    const Matrix3d g = zyz::attitude(a);
    const Matrix3d B = zyz::body_rates(a);
    const auto dB = zyz::body_rates_partials(a);
    const Vector3d gamma = zyz::poisson(a);
    const Vector3d rho = shape_F(params_, gamma);
    const Matrix3d DF = shape_DF(params_, gamma);

    Matrix3d Bdot = Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) Bdot += adot[i] * dB[i];
    const Vector3d omega = B * adot;
    const Vector3d omegadot = B * Vector3d(qddot.tail<3>()) + Bdot * adot;
    const Vector3d gammadot = gamma.cross(omega);
    const Vector3d rhodot = DF * gammadot;

    RollingBodyState out;
    out.gamma = gammadot;
    out.K = params_.inertia * omegadot +
            params_.mass * (rhodot.cross(omega.cross(rho)) +
                            rho.cross(omegadot.cross(rho)) +
                            rho.cross(omega.cross(rhodot)));
    const Vector3d x(st.q[0], st.q[1], gamma.dot(rho));
    const Vector3d xdot(st.qdot[0], st.qdot[1],
                        gammadot.dot(rho) + gamma.dot(rhodot));
    out.X = g.transpose() * xdot - omega.cross(g.transpose() * x);
    return out;
  }

  /// On-manifold chart state from plane position, attitude angles and body
  /// angular velocity (the admissible x-velocities are determined by them).
  State chart_state(double x1, double x2, const Vector3d& angles,
                    const Vector3d& omega) const {
    zyz::require_nonsingular(angles[1], 0.05);
    const Matrix3d g = zyz::attitude(angles);
    const Vector3d gamma = zyz::poisson(angles);
    const Vector3d rho = shape_F(params_, gamma);
    const Vector3d x(x1, x2, gamma.dot(rho));
    const Vector3d roll = g * omega.cross(rho);
    const Vector3d drag = x - g * rho;

    State st;
    st.q = (Vec(5) << x1, x2, angles[0], angles[1], angles[2]).finished();
    st.qdot.resize(5);
    st.qdot[0] = roll[0] + params_.kappa * (-drag[1]);
    st.qdot[1] = roll[1] + params_.kappa * drag[0];
    st.qdot.tail<3>() = zyz::body_rates(angles).colPivHouseholderQr().solve(omega);
    return st;
  }

  /// Generator of the plane's rotation lifted to the chart:
  /// Y = kappa (-x2, x1, 1, 0, 0); exactly horizontal for every shape.
  VectorFieldOnQ vertical_generator() const {
    const double kappa = params_.kappa;
    VectorFieldOnQ Y;
    Y.value = [kappa](const Vec& q) {
      return (Vec(5) << -kappa * q[1], kappa * q[0], kappa, 0.0, 0.0)
          .finished();
    };
    Y.jacobian = [kappa](const Vec&) {
      Mat j = Mat::Zero(5, 5);
      j(0, 1) = -kappa;
      j(1, 0) = kappa;
      return j;
    };
    return Y;
  }

  /// Alternative generator rotating the plane positions only:
  /// Y = kappa (-x2, x1, 0, 0, 0).  For the homogeneous ball this differs
  /// from the vertical generator by a section of the constraint distribution.
  VectorFieldOnQ plane_generator() const {
    const double kappa = params_.kappa;
    VectorFieldOnQ Y;
    Y.value = [kappa](const Vec& q) {
      return (Vec(5) << -kappa * q[1], kappa * q[0], 0.0, 0.0, 0.0).finished();
    };
    Y.jacobian = [kappa](const Vec&) {
      Mat j = Mat::Zero(5, 5);
      j(0, 1) = -kappa;
      j(1, 0) = kappa;
      return j;
    };
    return Y;
  }

 private:
  RollingBodyParams params_;
};

}  // namespace nonholo

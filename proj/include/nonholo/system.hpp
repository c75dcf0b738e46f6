#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "nonholo/errors.hpp"

namespace nonholo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point of velocity phase space.
struct State {
  Vec q;
  Vec qdot;
  double t = 0.0;
};

/// Vector field on configuration space.  The Jacobian callback is optional;
/// consumers fall back to finite differences when it is absent.
struct VectorFieldOnQ {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;  // (i,j) = d value_i / d q_j
};

/// Constant vector field convenience.
inline VectorFieldOnQ constant_field(const Vec& y) {
  const int n = int(y.size());
  return VectorFieldOnQ{
      [y](const Vec&) { return y; },
      [n](const Vec&) { return Mat::Zero(n, n); },
  };
}

/// Mechanical system with kinematic (affine-velocity) constraints:
///
///   L(q, qdot) = 1/2 qdot . A(q) qdot + b(q) . qdot - V(q)
///   S(q) qdot + s(q) = 0            (k independent rows)
///
/// A is symmetric positive definite, S has full row rank k on the domain of
/// interest.  b, V and s may be omitted (treated as zero).  Derivative
/// callbacks are optional; central finite differences are used when they are
/// not supplied.  Index conventions for the derivatives:
///
///   dA[j](i,m) = dA_im/dq_j     db(i,j) = db_i/dq_j     dV[j] = dV/dq_j
///   dS[j](a,i) = dS_ai/dq_j     ds(a,j) = ds_a/dq_j
struct MechanicalSystem {
  int n = 0;  // configuration dimension
  int k = 0;  // number of constraint rows

  std::function<Mat(const Vec&)> A;
  std::function<Vec(const Vec&)> b;       // optional
  std::function<double(const Vec&)> V;    // optional
  std::function<Mat(const Vec&)> S;
  std::function<Vec(const Vec&)> s;       // optional (zero -> linear constraints)

  std::function<std::vector<Mat>(const Vec&)> dA;  // optional
  std::function<Mat(const Vec&)> db;               // optional
  std::function<Vec(const Vec&)> dV;               // optional
  std::function<std::vector<Mat>(const Vec&)> dS;  // optional
  std::function<Mat(const Vec&)> ds;               // optional

  // Relative step for central differences, scaled per coordinate by
  // max(1, |q_i|).  Default: cbrt(machine epsilon).
  double fd_step = 6.0554544523933395e-06;

  // On-manifold tolerance used when reporting |S qdot + s| residuals.
  double tol_constraint = 1e-8;
};

/// Orthonormal kernel basis and distinguished constraint-solving shift at a
/// configuration: the admissible velocities are Z0 + span(columns of D).
struct ConstraintGeometry {
  Mat D;        // n x (n-k), orthonormal columns spanning ker S(q)
  Vec Z0;       // minimum-norm solution of S Z0 + s = 0
  Vec sigma_s;  // singular values of S(q) (diagnostic)
};

namespace detail {

inline std::string format_vec(const Vec& v) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string(what) + " is not finite");
}

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + " is not finite");
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericalError(std::string(what) + " is not finite");
}

/// Per-coordinate step size for central differences.
inline double fd_h(double step, double qi) {
  return step * std::max(1.0, std::abs(qi));
}

/// Central difference of an arbitrary (scalar/vector/matrix valued) callback
/// with respect to coordinate j.
template <typename F>
auto central_diff(F&& f, Vec q, int j, double h) {
  q[j] += h;
  auto plus = f(q);
  q[j] -= 2.0 * h;
  auto minus = f(q);
  return ((plus - minus) / (2.0 * h)).eval();
}

template <typename F>
double central_diff_scalar(F&& f, Vec q, int j, double h) {
  q[j] += h;
  const double plus = f(q);
  q[j] -= 2.0 * h;
  const double minus = f(q);
  return (plus - minus) / (2.0 * h);
}

// --- evaluated derivative bundles (analytic callback or FD fallback) ---

inline std::vector<Mat> eval_dA(const MechanicalSystem& sys, const Vec& q) {
  if (sys.dA) return sys.dA(q);
  std::vector<Mat> out(sys.n);
  for (int j = 0; j < sys.n; ++j)
    out[j] = central_diff(sys.A, q, j, fd_h(sys.fd_step, q[j]));
  return out;
}

inline Mat eval_db(const MechanicalSystem& sys, const Vec& q) {
  if (!sys.b) return Mat::Zero(sys.n, sys.n);
  if (sys.db) return sys.db(q);
  Mat out(sys.n, sys.n);
  for (int j = 0; j < sys.n; ++j)
    out.col(j) = central_diff(sys.b, q, j, fd_h(sys.fd_step, q[j]));
  return out;
}

inline Vec eval_dV(const MechanicalSystem& sys, const Vec& q) {
  if (!sys.V) return Vec::Zero(sys.n);
  if (sys.dV) return sys.dV(q);
  Vec out(sys.n);
  for (int j = 0; j < sys.n; ++j)
    out[j] = central_diff_scalar(sys.V, q, j, fd_h(sys.fd_step, q[j]));
  return out;
}

inline std::vector<Mat> eval_dS(const MechanicalSystem& sys, const Vec& q) {
  if (sys.dS) return sys.dS(q);
  std::vector<Mat> out(sys.n);
  for (int j = 0; j < sys.n; ++j)
    out[j] = central_diff(sys.S, q, j, fd_h(sys.fd_step, q[j]));
  return out;
}

inline Mat eval_ds(const MechanicalSystem& sys, const Vec& q) {
  if (!sys.s) return Mat::Zero(sys.k, sys.n);
  if (sys.ds) return sys.ds(q);
  Mat out(sys.k, sys.n);
  for (int j = 0; j < sys.n; ++j)
    out.col(j) = central_diff(sys.s, q, j, fd_h(sys.fd_step, q[j]));
  return out;
}

inline Vec eval_b(const MechanicalSystem& sys, const Vec& q) {
  return sys.b ? sys.b(q) : Vec::Zero(sys.n);
}

inline double eval_V(const MechanicalSystem& sys, const Vec& q) {
  return sys.V ? sys.V(q) : 0.0;
}

inline Vec eval_s(const MechanicalSystem& sys, const Vec& q) {
  return sys.s ? sys.s(q) : Vec::Zero(sys.k);
}

/// Jacobian of a VectorFieldOnQ, analytic if provided else FD.
inline Mat field_jacobian(const VectorFieldOnQ& Y, const Vec& q, double fd_step) {
  if (Y.jacobian) return Y.jacobian(q);
  const int n = int(q.size());
  Mat out(n, n);
  for (int j = 0; j < n; ++j)
    out.col(j) = central_diff(Y.value, q, j, fd_h(fd_step, q[j]));
  return out;
}

}  // namespace detail
}  // namespace nonholo

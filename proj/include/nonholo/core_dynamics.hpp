#pragma once

#include <Eigen/Dense>
#include <utility>

#include "nonholo/system.hpp"

namespace nonholo {

/// Conjugate momentum covector p = A(q) qdot + b(q).
inline Vec momentum_covector(const MechanicalSystem& sys, const State& st) {
  Vec p = sys.A(st.q) * st.qdot + detail::eval_b(sys, st.q);
  detail::require_finite(p, "momentum covector");
  return p;
}

/// Gradient of the Lagrangian in q at fixed qdot:
///   dL/dq_j = 1/2 qdot . (dA/dq_j) qdot + (db/dq_j) . qdot - dV/dq_j
inline Vec lagrangian_gradient_q(const MechanicalSystem& sys, const State& st) {
  const std::vector<Mat> dA = detail::eval_dA(sys, st.q);
  const Mat db = detail::eval_db(sys, st.q);
  const Vec dV = detail::eval_dV(sys, st.q);
  Vec g(sys.n);
  for (int j = 0; j < sys.n; ++j)
    g[j] = 0.5 * st.qdot.dot(dA[j] * st.qdot) + db.col(j).dot(st.qdot) - dV[j];
  return g;
}

/// The pair (ell, sigma) entering the reaction force:
///   ell_i   = sum_j (sum_m dA_im/dq_j qdot_m + db_i/dq_j) qdot_j - dL/dq_i
///   sigma_a = (S' qdot)_a + (ds qdot)_a, with S' = sum_j qdot_j dS/dq_j
/// so that the equations of motion read A qddot = -ell + R and the
/// differentiated constraint reads S qddot + sigma = 0.
inline std::pair<Vec, Vec> ell_sigma(const MechanicalSystem& sys, const State& st) {
  const std::vector<Mat> dA = detail::eval_dA(sys, st.q);
  const Mat db = detail::eval_db(sys, st.q);
  const Vec dV = detail::eval_dV(sys, st.q);

  Vec ell = Vec::Zero(sys.n);
  for (int j = 0; j < sys.n; ++j)
    ell += st.qdot[j] * (dA[j] * st.qdot + db.col(j));
  for (int i = 0; i < sys.n; ++i) {
    const double dLdqi =
        0.5 * st.qdot.dot(dA[i] * st.qdot) + db.col(i).dot(st.qdot) - dV[i];
    ell[i] -= dLdqi;
  }

  const std::vector<Mat> dS = detail::eval_dS(sys, st.q);
  const Mat ds = detail::eval_ds(sys, st.q);
  Vec sigma = ds * st.qdot;
  for (int j = 0; j < sys.n; ++j)
    sigma += st.qdot[j] * (dS[j] * st.qdot);

  detail::require_finite(ell, "ell");
  detail::require_finite(sigma, "sigma");
  return {ell, sigma};
}

namespace detail {

/// Cholesky with a conditioning guard: LLT "succeeds" on some exactly
/// singular PSD matrices (the zero pivot rounds to ~sqrt(eps)), so inspect
/// the factor diagonal as well.  Ratio below 1e-7 means cond >~ 1e14.
template <typename ErrorT>
Eigen::LLT<Mat> checked_llt(const Mat& m, const char* what, const Vec& q) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() == Eigen::Success) {
    const Vec diag = llt.matrixLLT().diagonal();
    if (diag.minCoeff() > 1e-7 * diag.maxCoeff()) return llt;
  }
  throw ErrorT(std::string(what) + " at q=" + format_vec(q));
}

struct DynamicsCore {
  Vec ell;
  Eigen::LLT<Mat> lltA;
  Vec reaction;
};

inline DynamicsCore dynamics_core(const MechanicalSystem& sys, const State& st) {
  DynamicsCore core;
  auto [ell, sigma] = ell_sigma(sys, st);
  core.ell = std::move(ell);

  const Mat A = sys.A(st.q);
  require_finite(A, "A(q)");
  core.lltA = checked_llt<MetricError>(A, "A(q) not positive definite", st.q);

  const Mat S = sys.S(st.q);
  require_finite(S, "S(q)");
  const Mat AinvST = core.lltA.solve(S.transpose());
  const Mat G = S * AinvST;  // S A^{-1} S^T, k x k SPD when S has full rank
  const auto lltG =
      checked_llt<ConstraintDegeneracyError>(G, "S A^{-1} S^T singular", st.q);

  const Vec lambda = lltG.solve(S * core.lltA.solve(core.ell) - sigma);
  core.reaction = S.transpose() * lambda;
  require_finite(core.reaction, "reaction force");
  return core;
}

}  // namespace detail

/// d'Alembert reaction covector R at the given state.  The state need not lie
/// on the constraint manifold; residual flags are the caller's business.
inline Vec reaction_force(const MechanicalSystem& sys, const State& st) {
  return detail::dynamics_core(sys, st).reaction;
}

/// Constrained accelerations qddot = A^{-1} (-ell + R).
inline Vec accelerations(const MechanicalSystem& sys, const State& st) {
  auto core = detail::dynamics_core(sys, st);
  Vec qdd = core.lltA.solve(core.reaction - core.ell);
  detail::require_finite(qdd, "accelerations");
  return qdd;
}

/// Kernel basis and minimum-norm affine shift at configuration q.
/// The admissible velocity fiber is { Z0 + D u : u in R^{n-k} }.
/// No continuity of D across configurations is promised.
inline ConstraintGeometry constraint_geometry(const MechanicalSystem& sys,
                                              const Vec& q) {
  const Mat S = sys.S(q);
  detail::require_finite(S, "S(q)");
  Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullV | Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  const double tol = double(std::max(sys.n, sys.k)) *
                     std::numeric_limits<double>::epsilon() * sv[0];
  if (sv.size() < sys.k || sv[sys.k - 1] <= tol)
    throw ConstraintDegeneracyError("S(q) rank deficient at q=" +
                                    detail::format_vec(q));

  ConstraintGeometry geo;
  geo.sigma_s = sv;
  geo.D = svd.matrixV().rightCols(sys.n - sys.k);

  // Minimum-norm Z0 with S Z0 = -s: pseudo-inverse through the same SVD.
  const Vec rhs = -detail::eval_s(sys, q);
  const Vec coeff = svd.matrixU().transpose() * rhs;
  geo.Z0 = Vec::Zero(sys.n);
  for (int i = 0; i < sys.k; ++i)
    geo.Z0 += (coeff[i] / sv[i]) * svd.matrixV().col(i);
  return geo;
}

/// Kinetic-metric-orthogonal projection of the velocity onto the admissible
/// affine fiber at q.  Idempotent; leaves admissible states untouched.
inline State project_velocity(const MechanicalSystem& sys, const State& st) {
  const Mat A = sys.A(st.q);
  const auto lltA =
      detail::checked_llt<MetricError>(A, "A(q) not positive definite", st.q);
  const Mat S = sys.S(st.q);
  const Vec resid = S * st.qdot + detail::eval_s(sys, st.q);

  const Mat AinvST = lltA.solve(S.transpose());
  const auto lltG = detail::checked_llt<ConstraintDegeneracyError>(
      Mat(S * AinvST), "S A^{-1} S^T singular", st.q);
  State out = st;
  out.qdot = st.qdot - AinvST * lltG.solve(resid);
  detail::require_finite(out.qdot, "projected velocity");
  return out;
}

/// Mechanical energy E = 1/2 qdot . A qdot + V.  (The gyroscopic term b
/// contributes p.qdot - L = ... with b cancelling; it does not appear.)
inline double energy(const MechanicalSystem& sys, const State& st) {
  const double e = 0.5 * st.qdot.dot(sys.A(st.q) * st.qdot) +
                   detail::eval_V(sys, st.q);
  detail::require_finite(e, "energy");
  return e;
}

/// Momentum of a vector field: J_Y = p . Y(q).
inline double momentum_of_field(const MechanicalSystem& sys, const State& st,
                                const VectorFieldOnQ& Y) {
  return momentum_covector(sys, st).dot(Y.value(st.q));
}

/// Moving energy E_{L,Y} = E - J_Y.
inline double moving_energy(const MechanicalSystem& sys, const State& st,
                            const VectorFieldOnQ& Y) {
  return energy(sys, st) - momentum_of_field(sys, st, Y);
}

/// Lift of Y against L:  Yhat(L) = Y . dL/dq + p . (dY qdot).
/// Along solutions, dJ_Y/dt = Yhat(L) + R . Y.
inline double lifted_derivative(const MechanicalSystem& sys, const State& st,
                                const VectorFieldOnQ& Y) {
  const Vec y = Y.value(st.q);
  const Mat dY = detail::field_jacobian(Y, st.q, sys.fd_step);
  const Vec p = momentum_covector(sys, st);
  const double out = lagrangian_gradient_q(sys, st).dot(y) + p.dot(dY * st.qdot);
  detail::require_finite(out, "lifted derivative");
  return out;
}

/// Constraint residual S qdot + s at the state.
inline Vec constraint_residual(const MechanicalSystem& sys, const State& st) {
  return sys.S(st.q) * st.qdot + detail::eval_s(sys, st.q);
}

}  // namespace nonholo

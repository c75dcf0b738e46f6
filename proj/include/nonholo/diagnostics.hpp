#pragma once

// Conservation diagnostics: drift measurement along trajectories, sampled
// verification of the moving-energy conditions for a candidate symmetry
// field, and equivalence tests between generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nonholo/core_dynamics.hpp"
#include "nonholo/integrator.hpp"
#include "nonholo/rng.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

// --- drift measurement -----------------------------------------------------

struct DriftReport {
  std::string observable;
  double initial = 0.0;
  double max_drift = 0.0;       // max_t |v(t) - v(0)|
  double relative_drift = 0.0;  // max_drift / (1 + |v(0)|)
  double slope = 0.0;           // least-squares rate of v(t) - v(0)
  int samples = 0;
};

inline DriftReport drift_report(const Trajectory& traj,
                                const std::string& name) {
  const std::vector<double>& v = traj.series(name);
  if (v.empty()) throw std::invalid_argument("drift_report: empty series");
  DriftReport r;
  r.observable = name;
  r.initial = v.front();
  r.samples = int(v.size());
  double st = 0.0, stt = 0.0, sv = 0.0, stv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - r.initial;
    r.max_drift = std::max(r.max_drift, std::abs(d));
    const double t = traj.times[i];
    st += t;
    stt += t * t;
    sv += d;
    stv += t * d;
  }
  r.relative_drift = r.max_drift / (1.0 + std::abs(r.initial));
  const double m = double(v.size());
  const double denom = m * stt - st * st;
  r.slope = denom > 0.0 ? (m * stv - st * sv) / denom : 0.0;
  return r;
}

// --- second-order flow of a chart system ------------------------------------

inline State state_from_flat(int n, const Vec& y, double t = 0.0) {
  State st;
  st.q = y.head(n);
  st.qdot = y.tail(n);
  st.t = t;
  return st;
}

inline Vec flat_from_state(const State& st) {
  Vec y(2 * st.q.size());
  y << st.q, st.qdot;
  return y;
}

/// Package a chart system as a first-order flow on y = [q; qdot].  The
/// optional projector restores the affine velocity constraint after every
/// step; observables are evaluated on the unpacked state.
inline FlowProblem second_order_flow(
    const MechanicalSystem& sys, bool project,
    const std::vector<std::pair<std::string, std::function<double(const State&)>>>&
        observables = {}) {
  const int n = sys.n;
  FlowProblem fp;
  fp.dimension = 2 * n;
  fp.rhs = [sys, n](double t, const Vec& y) {
    const State st = state_from_flat(n, y, t);
    Vec out(2 * n);
    out.head(n) = st.qdot;
    out.tail(n) = accelerations(sys, st);
    return out;
  };
  if (project) {
    fp.projector = [sys, n](const Vec& y) {
      return flat_from_state(project_velocity(sys, state_from_flat(n, y)));
    };
  }
  for (const auto& [name, fn] : observables) {
    fp.observables.emplace_back(name, [n, fn](const Vec& y) {
      return fn(state_from_flat(n, y));
    });
  }
  return fp;
}

// --- admissible-state sampling ----------------------------------------------

/// Random state on the affine constraint manifold at q: qdot = Z0 + D u with
/// u uniform in the (n-k)-ball of the given radius.
inline State sample_admissible_state(const MechanicalSystem& sys, const Vec& q,
                                     Rng& rng, double radius = 1.0) {
  const ConstraintGeometry geo = constraint_geometry(sys, q);
  State st;
  st.q = q;
  st.qdot = geo.Z0 + geo.D * rng.ball(int(geo.D.cols()), radius);
  return st;
}

// --- moving-energy conditions for a candidate generator ----------------------

struct SymmetryProbe {
  Vec q0;               // base configuration of the drift probe
  Vec qdot0;            // seed velocity (projected before use)
  double t_end = 10.0;
  double h = 1e-3;
  int record_every = 10;
};

struct SymmetryTestOptions {
  int velocity_samples = 64;    // admissible velocities per base point
  double velocity_radius = 10.0;
  double tol_structural = 1e-8;  // conditions evaluated pointwise
  double tol_drift = 1e-7;       // probe-trajectory relative drift
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

/// Pointwise and trajectory evidence for conservation of the moving energy
/// E_{L,Y} = E - p.Y.  Writing admissible velocities as qdot = Z0 + D u,
/// the exact balance is
///   d/dt E_{L,Y} = R(q, qdot) . (Z0 - Y) - Yhat(L),
/// so E_{L,Y} is a first integral when, on the constraint manifold,
///   (i)  the reaction force annihilates Y - Z0, and
///   (ii) the lifted derivative Yhat(L) vanishes.
/// Condition (iii) is the direct check: the moving energy holds still along a
/// probe trajectory.  A consistent report never sees (i) and (ii) pass while
/// (iii) fails.
struct ConditionReport {
  double reaction_pairing_max = 0.0;    // (i)  max |R . (Y - Z0)|
  double lifted_derivative_max = 0.0;   // (ii) max |Yhat(L)|
  double moving_energy_drift = 0.0;     // (iii) relative drift along a probe
  double horizontality_max = 0.0;       // max ||S Y + s||
  double invariance_residual_max = 0.0;  // max_i ||S [Y, X_i]||
  bool pass_reaction = false;
  bool pass_lifted = false;
  bool pass_drift = false;
  bool consistent = false;
  SymmetryTestOptions options;
};

/// Condition (i) at one configuration, sampled over admissible velocities.
inline double reaction_pairing_max(const MechanicalSystem& sys, const Vec& q,
                                   const VectorFieldOnQ& Y, Rng& rng,
                                   int samples, double radius) {
  const ConstraintGeometry geo = constraint_geometry(sys, q);
  const Vec gap = Y.value(q) - geo.Z0;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    State st;
    st.q = q;
    st.qdot = geo.Z0 + geo.D * rng.ball(int(geo.D.cols()), radius);
    worst = std::max(worst, std::abs(reaction_force(sys, st).dot(gap)));
  }
  return worst;
}

/// Condition (ii) at one configuration, sampled over admissible velocities.
inline double lifted_derivative_max(const MechanicalSystem& sys, const Vec& q,
                                    const VectorFieldOnQ& Y, Rng& rng,
                                    int samples, double radius) {
  const ConstraintGeometry geo = constraint_geometry(sys, q);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    State st;
    st.q = q;
    st.qdot = geo.Z0 + geo.D * rng.ball(int(geo.D.cols()), radius);
    worst = std::max(worst, std::abs(lifted_derivative(sys, st, Y)));
  }
  return worst;
}

inline double horizontality_residual(const MechanicalSystem& sys, const Vec& q,
                                     const VectorFieldOnQ& Y) {
  return (sys.S(q) * Y.value(q) + detail::eval_s(sys, q)).norm();
}

/// Infinitesimal invariance of the constraint distribution: ||S(q) [Y, X_i](q)||
/// for smooth local sections X_i extending an orthonormal kernel basis at q,
///   X_i(q') = (I - S'^T (S' S'^T)^{-1} S') D_i(q).
/// Brackets are taken with finite-difference Jacobians.
inline double invariance_residual(const MechanicalSystem& sys, const Vec& q,
                                  const VectorFieldOnQ& Y) {
  const ConstraintGeometry geo = constraint_geometry(sys, q);
  const Mat S0 = sys.S(q);
  const Vec Yq = Y.value(q);
  const Mat dY = detail::field_jacobian(Y, q, sys.fd_step);

  double worst = 0.0;
  for (int i = 0; i < geo.D.cols(); ++i) {
    const Vec Di = geo.D.col(i);
    auto section = [&](const Vec& qp) -> Vec {
      const Mat Sp = sys.S(qp);
      const Mat G = Sp * Sp.transpose();
      return Di - Sp.transpose() * G.ldlt().solve(Sp * Di);
    };
    // d(X_i) by central differences, column by column
    Mat dX = Mat::Zero(sys.n, sys.n);
    for (int j = 0; j < sys.n; ++j) {
      const double h = detail::fd_h(sys.fd_step, q[j]);
      Vec qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      dX.col(j) = (section(qp) - section(qm)) / (2.0 * h);
    }
    const Vec bracket = dX * Yq - dY * section(q);
    worst = std::max(worst, (S0 * bracket).norm());
  }
  return worst;
}

/// Relative moving-energy drift along one probe trajectory.
inline DriftReport moving_energy_probe(const MechanicalSystem& sys,
                                       const VectorFieldOnQ& Y,
                                       const SymmetryProbe& probe) {
  FlowProblem fp = second_order_flow(
      sys, true,
      {{"moving_energy",
        [sys, Y](const State& st) { return moving_energy(sys, st, Y); }}});
  State st0;
  st0.q = probe.q0;
  st0.qdot = probe.qdot0;
  IntegrateOptions opt;
  opt.h = probe.h;
  opt.record_every = probe.record_every;
  const Trajectory traj =
      integrate(fp, flat_from_state(st0), 0.0, probe.t_end, opt);
  return drift_report(traj, "moving_energy");
}

/// Evaluate all conditions for Y over the given base configurations plus one
/// probe trajectory.  The sampling is driven by a deterministic generator
/// seeded from the options.
inline ConditionReport classify_generator(const MechanicalSystem& sys,
                                          const VectorFieldOnQ& Y,
                                          const std::vector<Vec>& base_points,
                                          const SymmetryProbe& probe,
                                          const SymmetryTestOptions& opt = {}) {
  if (base_points.empty())
    throw std::invalid_argument("classify_generator: no base points");
  Rng rng(opt.seed);
  ConditionReport rep;
  rep.options = opt;
  for (const Vec& q : base_points) {
    rep.reaction_pairing_max =
        std::max(rep.reaction_pairing_max,
                 reaction_pairing_max(sys, q, Y, rng, opt.velocity_samples,
                                      opt.velocity_radius));
    rep.lifted_derivative_max =
        std::max(rep.lifted_derivative_max,
                 lifted_derivative_max(sys, q, Y, rng, opt.velocity_samples,
                                       opt.velocity_radius));
    rep.horizontality_max =
        std::max(rep.horizontality_max, horizontality_residual(sys, q, Y));
    rep.invariance_residual_max =
        std::max(rep.invariance_residual_max, invariance_residual(sys, q, Y));
  }
  rep.moving_energy_drift =
      moving_energy_probe(sys, Y, probe).relative_drift;

  rep.pass_reaction = rep.reaction_pairing_max <= opt.tol_structural;
  rep.pass_lifted = rep.lifted_derivative_max <= opt.tol_structural;
  rep.pass_drift = rep.moving_energy_drift <= opt.tol_drift;
  rep.consistent = !(rep.pass_reaction && rep.pass_lifted) || rep.pass_drift;
  return rep;
}

// --- generator equivalence ----------------------------------------------------

/// Two horizontal generators define the same moving energy iff the momentum
/// gap p . (Y1 - Y2) vanishes on the constraint manifold; with W = Y1 - Y2
/// that splits into A W _|_ ker S and (A Z0 + b) . W = 0.
struct EquivalenceReport {
  double momentum_gap_max = 0.0;       // sampled |p . W|
  double kernel_orthogonality_max = 0.0;  // max_i |(A D_i) . W|
  double level_pairing_max = 0.0;         // |(A Z0 + b) . W|
  bool gyrostatic = false;  // b != 0 somewhere: W must cancel it exactly
  bool equivalent = false;
  double tol = 0.0;
};

inline EquivalenceReport generator_equivalence(
    const MechanicalSystem& sys, const VectorFieldOnQ& Y1,
    const VectorFieldOnQ& Y2, const std::vector<Vec>& base_points, Rng& rng,
    int velocity_samples = 16, double velocity_radius = 10.0,
    double tol = 1e-8) {
  EquivalenceReport rep;
  rep.tol = tol;
  for (const Vec& q : base_points) {
    const ConstraintGeometry geo = constraint_geometry(sys, q);
    const Vec W = Y1.value(q) - Y2.value(q);
    const Mat A = sys.A(q);
    const Vec b = detail::eval_b(sys, q);
    if (b.norm() > 0.0) rep.gyrostatic = true;

    for (int i = 0; i < geo.D.cols(); ++i)
      rep.kernel_orthogonality_max = std::max(
          rep.kernel_orthogonality_max, std::abs((A * geo.D.col(i)).dot(W)));
    rep.level_pairing_max =
        std::max(rep.level_pairing_max, std::abs((A * geo.Z0 + b).dot(W)));

    for (int i = 0; i < velocity_samples; ++i) {
      State st;
      st.q = q;
      st.qdot = geo.Z0 + geo.D * rng.ball(int(geo.D.cols()), velocity_radius);
      rep.momentum_gap_max =
          std::max(rep.momentum_gap_max,
                   std::abs(momentum_covector(sys, st).dot(W)));
    }
  }
  rep.equivalent = rep.momentum_gap_max <= tol &&
                   rep.kernel_orthogonality_max <= tol &&
                   rep.level_pairing_max <= tol;
  return rep;
}

}  // namespace nonholo

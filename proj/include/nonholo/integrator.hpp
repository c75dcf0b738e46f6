#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

enum class Method { rk4, rk45 };

inline Method method_from_string(const std::string& name) {
  if (name == "rk4") return Method::rk4;
  if (name == "rk45") return Method::rk45;
  throw ConfigError("unknown integration method '" + name + "'");
}

inline const char* method_name(Method m) {
  return m == Method::rk4 ? "rk4" : "rk45";
}

/// First-order flow y' = f(t, y) with an optional post-step projector onto an
/// invariant manifold, plus named scalar observables recorded along the way.
struct FlowProblem {
  int dimension = 0;
  std::function<Vec(double, const Vec&)> rhs;
  std::function<Vec(const Vec&)> projector;  // optional
  std::vector<std::pair<std::string, std::function<double(const Vec&)>>>
      observables;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<std::pair<std::string, std::vector<double>>> observables;

  const std::vector<double>& series(const std::string& name) const {
    for (const auto& [n, v] : observables)
      if (n == name) return v;
    throw std::invalid_argument("no observable '" + name + "' in trajectory");
  }
};

/// Called on every recorded sample; enables streaming output that survives a
/// mid-run failure.
using RecordSink =
    std::function<void(double t, const Vec& y, const std::vector<double>& obs)>;

struct IntegrateOptions {
  Method method = Method::rk4;
  double h = 1e-3;          // rk4 step / rk45 initial step
  double rtol = 1e-8;       // rk45 only
  double atol = 1e-10;      // rk45 only
  int record_every = 1;     // record every k-th accepted step
};

namespace detail {

inline Vec eval_rhs(const FlowProblem& fp, double t, const Vec& y,
                    const char* stage) {
  Vec f = fp.rhs(t, y);
  if (!f.allFinite())
    throw NumericalError(std::string("non-finite rhs (") + stage +
                         ") at t=" + std::to_string(t));
  return f;
}

inline Vec apply_projector(const FlowProblem& fp, const Vec& y) {
  if (!fp.projector) return y;
  Vec p = fp.projector(y);
  if (!p.allFinite()) throw NumericalError("projector produced non-finite state");
  return p;
}

}  // namespace detail

/// One classical RK4 step (projector applied afterwards if present).
inline Vec rk4_step(const FlowProblem& fp, const Vec& y, double t, double h) {
  const Vec k1 = detail::eval_rhs(fp, t, y, "rk4 k1");
  const Vec k2 = detail::eval_rhs(fp, t + 0.5 * h, y + 0.5 * h * k1, "rk4 k2");
  const Vec k3 = detail::eval_rhs(fp, t + 0.5 * h, y + 0.5 * h * k2, "rk4 k3");
  const Vec k4 = detail::eval_rhs(fp, t + h, y + h * k3, "rk4 k4");
  Vec out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return detail::apply_projector(fp, out);
}

namespace detail {

struct Recorder {
  const FlowProblem& fp;
  Trajectory traj;
  const RecordSink& sink;

  Recorder(const FlowProblem& f, const RecordSink& s) : fp(f), sink(s) {
    for (const auto& [name, _] : fp.observables)
      traj.observables.emplace_back(name, std::vector<double>{});
  }

  void record(double t, const Vec& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    std::vector<double> obs;
    obs.reserve(fp.observables.size());
    for (std::size_t i = 0; i < fp.observables.size(); ++i) {
      const double v = fp.observables[i].second(y);
      traj.observables[i].second.push_back(v);
      obs.push_back(v);
    }
    if (sink) sink(t, y, obs);
  }
};

// Fehlberg 4(5) embedded pair; advances with the 5th-order solution.
inline std::pair<Vec, double> rkf45_attempt(const FlowProblem& fp, const Vec& y,
                                            double t, double h, double rtol,
                                            double atol) {
  const Vec k1 = eval_rhs(fp, t, y, "rk45 k1");
  const Vec k2 = eval_rhs(fp, t + h / 4.0, y + h * (k1 / 4.0), "rk45 k2");
  const Vec k3 = eval_rhs(fp, t + 3.0 * h / 8.0,
                          y + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2), "rk45 k3");
  const Vec k4 = eval_rhs(
      fp, t + 12.0 * h / 13.0,
      y + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 +
               7296.0 / 2197.0 * k3),
      "rk45 k4");
  const Vec k5 =
      eval_rhs(fp, t + h,
               y + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 -
                        845.0 / 4104.0 * k4),
               "rk45 k5");
  const Vec k6 =
      eval_rhs(fp, t + h / 2.0,
               y + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 +
                        1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5),
               "rk45 k6");

  const Vec y4 = y + h * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 +
                          2197.0 / 4104.0 * k4 - 1.0 / 5.0 * k5);
  const Vec y5 = y + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 +
                          28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 +
                          2.0 / 55.0 * k6);

  double err2 = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
    const double e = (y5[i] - y4[i]) / scale;
    err2 += e * e;
  }
  const double err = std::sqrt(err2 / double(y.size()));
  return {y5, err};
}

}  // namespace detail

/// Integrate the flow from (t0, y0) to t_end.  The projector, when present,
/// is applied to the initial state and after every accepted step; observables
/// are evaluated on projected states.  Deterministic: identical inputs give
/// bitwise identical trajectories.
inline Trajectory integrate(const FlowProblem& fp, Vec y0, double t0,
                            double t_end, const IntegrateOptions& opt = {},
                            const RecordSink& sink = {}) {
  if (!(t_end > t0)) throw ConfigError("integrate: t_end must exceed t0");
  if (!(opt.h > 0.0)) throw ConfigError("integrate: step size must be positive");
  if (opt.record_every < 1)
    throw ConfigError("integrate: record_every must be >= 1");

  detail::Recorder rec(fp, sink);
  Vec y = detail::apply_projector(fp, std::move(y0));
  double t = t0;
  rec.record(t, y);

  const double span = t_end - t0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));

  if (opt.method == Method::rk4) {
    long step_index = 0;
    while (t < t_end - t_eps) {
      const double h = std::min(opt.h, t_end - t);
      y = rk4_step(fp, y, t, h);
      t += h;
      ++step_index;
      if (step_index % opt.record_every == 0 || t >= t_end - t_eps)
        rec.record(t, y);
    }
    if (rec.traj.times.back() != t) rec.record(t, y);
    return std::move(rec.traj);
  }

  // rk45 adaptive
  const double h_min = 1e-12 * span;
  double h = std::min(opt.h, span);
  long accepted = 0;
  while (t < t_end - t_eps) {
    h = std::min(h, t_end - t);
    if (h < h_min)
      throw StiffnessError("step size underflow at t=" + std::to_string(t));
    auto [y_next, err] = detail::rkf45_attempt(fp, y, t, h, opt.rtol, opt.atol);
    if (!std::isfinite(err) || err > 1.0) {
      const double shrink = std::isfinite(err)
                                ? std::max(0.2, 0.9 * std::pow(err, -0.25))
                                : 0.2;
      h *= shrink;
      continue;
    }
    y = detail::apply_projector(fp, y_next);
    t += h;
    ++accepted;
    if (accepted % opt.record_every == 0 || t >= t_end - t_eps)
      rec.record(t, y);
    const double grow =
        err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    h *= std::max(0.2, grow);
  }
  if (rec.traj.times.back() != t) rec.record(t, y);
  return std::move(rec.traj);
}

}  // namespace nonholo

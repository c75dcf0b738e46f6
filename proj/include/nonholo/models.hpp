#pragma once

// Type-erased registry of the built-in trivialized models, packaged as
// first-order flows for the integrator plus named observables and
// invariant-manifold residuals for the run layer.

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nonholo/chaplygin_nd.hpp"
#include "nonholo/errors.hpp"
#include "nonholo/integrator.hpp"
#include "nonholo/lr_system.hpp"
#include "nonholo/rolling_body.hpp"

namespace nonholo {

struct ModelSystem {
  std::string id;
  int dim = 0;
  std::vector<std::string> components;  // names of the flat-state entries
  std::function<Vec(double, const Vec&)> rhs;
  std::function<Vec(const Vec&)> projector;  // invariant-manifold repair
  std::vector<std::pair<std::string, std::function<double(const Vec&)>>>
      observables;
  std::function<std::vector<std::pair<std::string, double>>(const Vec&)>
      residuals;

  bool has_observable(const std::string& name) const {
    for (const auto& [n, f] : observables)
      if (n == name) return true;
    return false;
  }

  /// Assemble the integrator problem, selecting observables by name.
  FlowProblem flow(bool project,
                   const std::vector<std::string>& observable_names) const {
    FlowProblem fp;
    fp.dimension = dim;
    fp.rhs = rhs;
    if (project) fp.projector = projector;
    for (const auto& name : observable_names) {
      bool found = false;
      for (const auto& [n, f] : observables)
        if (n == name) {
          fp.observables.emplace_back(n, f);
          found = true;
          break;
        }
      if (!found)
        throw ConfigError("model '" + id + "' has no observable '" + name + "'");
    }
    return fp;
  }
};

inline std::vector<std::string> model_ids() {
  return {"veselova-3d",  "lr-son",          "rolling-body",
          "chaplygin-3d", "chaplygin-nd",    "chaplygin-nd-reduced"};
}

namespace detail {

inline std::vector<std::string> son_component_names(const std::string& prefix,
                                                    int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.push_back(prefix + "_" + std::to_string(i + 1) +
                    std::to_string(j + 1));
  return out;
}

inline void append_xyz(std::vector<std::string>& names,
                       const std::string& prefix, int n) {
  for (int i = 0; i < n; ++i)
    names.push_back(prefix + "_" + std::to_string(i + 1));
}

}  // namespace detail

/// General LR system on SO(n) in trivialized variables.
inline ModelSystem make_lr_model(const LRParams& params,
                                 const std::string& id = "lr-son") {
  params.validate();
  ModelSystem m;
  m.id = id;
  m.dim = lr_flat_dim(params);
  for (int j = 0; j < params.k(); ++j) {
    auto names = detail::son_component_names(
        "gamma" + std::to_string(j + 1), params.n);
    m.components.insert(m.components.end(), names.begin(), names.end());
  }
  auto omega_names = detail::son_component_names("Omega", params.n);
  m.components.insert(m.components.end(), omega_names.begin(),
                      omega_names.end());

  m.rhs = [params](double, const Vec& y) {
    return lr_vector_field_flat(params, y);
  };
  m.projector = [params](const Vec& y) {
    return lr_pack(lr_project(params, lr_unpack(params, y)));
  };
  m.observables = {
      {"energy",
       [params](const Vec& y) { return lr_energy(params, lr_unpack(params, y)); }},
      {"moving_energy",
       [params](const Vec& y) {
         return lr_moving_energy(params, lr_unpack(params, y));
       }},
      {"omega_norm",
       [params](const Vec& y) {
         return killing_norm(lr_unpack(params, y).Omega);
       }},
      {"constraint_residual",
       [params](const Vec& y) {
         return lr_constraint_residual(params, lr_unpack(params, y))
             .lpNorm<Eigen::Infinity>();
       }},
  };
  m.residuals = [params](const Vec& y) {
    const LRState st = lr_unpack(params, y);
    std::vector<std::pair<std::string, double>> out;
    out.emplace_back("constraint_level",
                     lr_constraint_residual(params, st).lpNorm<Eigen::Infinity>());
    out.emplace_back(
        "gamma_orthonormality",
        lr_gram_residual(params, st).lpNorm<Eigen::Infinity>());
    return out;
  };
  return m;
}

inline ModelSystem make_veselova_model(const LRParams& params) {
  if (params.n != 3 || params.k() != 1)
    throw ConfigError("veselova-3d needs n=3 with a single constraint row");
  return make_lr_model(params, "veselova-3d");
}

namespace detail {

inline ModelSystem make_rolling_common(const RollingBodyParams& params,
                                       bool ball_form) {
  params.validate();
  if (ball_form && params.shape != RollingBodyParams::Shape::sphere)
    throw ConfigError("chaplygin-3d needs the sphere shape");

  ModelSystem m;
  m.id = ball_form ? "chaplygin-3d" : "rolling-body";
  m.dim = 9;
  append_xyz(m.components, "K", 3);
  append_xyz(m.components, "X", 3);
  append_xyz(m.components, "gamma", 3);

  if (ball_form) {
    m.rhs = [params](double, const Vec& y) {
      return rolling_pack(chap3d_vector_field(params, rolling_unpack(y)));
    };
  } else {
    m.rhs = [params](double, const Vec& y) {
      return rolling_pack(rolling_body_vector_field(params, rolling_unpack(y)));
    };
  }
  m.projector = [params](const Vec& y) {
    return rolling_pack(rolling_body_project(params, rolling_unpack(y)));
  };
  m.observables = {
      {"energy",
       [params](const Vec& y) {
         return rolling_body_energy(params, rolling_unpack(y));
       }},
      {"moving_energy",
       [params](const Vec& y) {
         return rolling_body_moving_energy(params, rolling_unpack(y));
       }},
      {"omega_norm",
       [params](const Vec& y) {
         const auto st = rolling_unpack(y);
         return omega_from_K(params, st.gamma, st.K).norm();
       }},
      {"X_norm", [](const Vec& y) { return rolling_unpack(y).X.norm(); }},
      {"K_dot_gamma",
       [](const Vec& y) { return chap3d_vertical_momentum(rolling_unpack(y)); }},
      {"gamma_norm", [](const Vec& y) { return rolling_unpack(y).gamma.norm(); }},
      {"contact_residual",
       [params](const Vec& y) {
         return std::abs(rolling_body_residuals(params, rolling_unpack(y))[1]);
       }},
  };
  if (ball_form)
    m.observables.push_back({"tilde_energy", [params](const Vec& y) {
                               return chap3d_tilde_energy(params,
                                                          rolling_unpack(y));
                             }});
  m.residuals = [params](const Vec& y) {
    const Vec r = rolling_body_residuals(params, rolling_unpack(y));
    return std::vector<std::pair<std::string, double>>{
        {"gamma_unit", r[0]}, {"contact", r[1]}};
  };
  return m;
}

}  // namespace detail

/// Convex body rolling on the rotating plane, reduced variables (K, X, gamma).
inline ModelSystem make_rolling_body_model(const RollingBodyParams& params) {
  return detail::make_rolling_common(params, false);
}

/// Homogeneous-plane ball specialization (sphere shape required).
inline ModelSystem make_chap3d_model(const RollingBodyParams& params) {
  return detail::make_rolling_common(params, true);
}

/// n-dimensional rotating-plane ball, full variables (x, g, K).
inline ModelSystem make_chapnd_full_model(const ChapNDParams& params) {
  params.validate();
  ModelSystem m;
  m.id = "chaplygin-nd";
  m.dim = chapnd_full_dim(params);
  detail::append_xyz(m.components, "x", params.n);
  for (int i = 0; i < params.n; ++i)
    for (int j = 0; j < params.n; ++j)
      m.components.push_back("g_" + std::to_string(i + 1) +
                             std::to_string(j + 1));
  auto knames = detail::son_component_names("K", params.n);
  m.components.insert(m.components.end(), knames.begin(), knames.end());

  m.rhs = [params](double, const Vec& y) {
    return chapnd_full_pack(
        chapnd_full_vector_field(params, chapnd_full_unpack(params, y)));
  };
  m.projector = [params](const Vec& y) {
    return chapnd_full_pack(
        chapnd_full_project(params, chapnd_full_unpack(params, y)));
  };
  m.observables = {
      {"energy",
       [params](const Vec& y) {
         return chapnd_full_energy(params, chapnd_full_unpack(params, y));
       }},
      {"moving_energy",
       [params](const Vec& y) {
         return chapnd_full_moving_energy(params, chapnd_full_unpack(params, y));
       }},
      {"omega_norm",
       [params](const Vec& y) {
         const auto st = chapnd_full_unpack(params, y);
         return killing_norm(omega_from_K_nd(params, chapnd_gamma(st), st.K));
       }},
      {"x_norm",
       [params](const Vec& y) {
         return chapnd_full_unpack(params, y).x.norm();
       }},
  };
  m.residuals = [params](const Vec& y) {
    const Vec r = chapnd_full_residuals(params, chapnd_full_unpack(params, y));
    return std::vector<std::pair<std::string, double>>{
        {"orthogonality", r[0]}, {"height", r[1]}};
  };
  return m;
}

/// n-dimensional rotating-plane ball, body-frame variables (K, X, gamma, Xi).
inline ModelSystem make_chapnd_reduced_model(const ChapNDParams& params) {
  params.validate();
  ModelSystem m;
  m.id = "chaplygin-nd-reduced";
  m.dim = chapnd_reduced_dim(params);
  auto knames = detail::son_component_names("K", params.n);
  m.components.insert(m.components.end(), knames.begin(), knames.end());
  detail::append_xyz(m.components, "X", params.n);
  detail::append_xyz(m.components, "gamma", params.n);
  auto xinames = detail::son_component_names("Xi", params.n);
  m.components.insert(m.components.end(), xinames.begin(), xinames.end());

  m.rhs = [params](double, const Vec& y) {
    return chapnd_reduced_pack(
        chapnd_reduced_vector_field(params, chapnd_reduced_unpack(params, y)));
  };
  m.projector = [params](const Vec& y) {
    return chapnd_reduced_pack(
        chapnd_reduced_project(params, chapnd_reduced_unpack(params, y)));
  };
  m.observables = {
      {"energy",
       [params](const Vec& y) {
         return chapnd_reduced_energy(params, chapnd_reduced_unpack(params, y));
       }},
      {"moving_energy",
       [params](const Vec& y) {
         return chapnd_reduced_moving_energy(params,
                                             chapnd_reduced_unpack(params, y));
       }},
      {"omega_norm",
       [params](const Vec& y) {
         const auto st = chapnd_reduced_unpack(params, y);
         return killing_norm(omega_from_K_nd(params, st.gamma, st.K));
       }},
      {"X_norm",
       [params](const Vec& y) {
         return chapnd_reduced_unpack(params, y).X.norm();
       }},
      {"xi_spectrum_drift",
       [params](const Vec& y) {
         return chapnd_reduced_residuals(params,
                                         chapnd_reduced_unpack(params, y))[3];
       }},
  };
  m.residuals = [params](const Vec& y) {
    const Vec r =
        chapnd_reduced_residuals(params, chapnd_reduced_unpack(params, y));
    return std::vector<std::pair<std::string, double>>{
        {"gamma_unit", r[0]},
        {"contact", r[1]},
        {"xi_gamma", r[2]},
        {"xi_spectrum", r[3]}};
  };
  return m;
}

/// Typed parameter bundle used by the scenario layer.
using ModelParams = std::variant<LRParams, RollingBodyParams, ChapNDParams>;

inline ModelSystem make_model(const std::string& id, const ModelParams& params) {
  if (id == "veselova-3d") return make_veselova_model(std::get<LRParams>(params));
  if (id == "lr-son") return make_lr_model(std::get<LRParams>(params));
  if (id == "rolling-body")
    return make_rolling_body_model(std::get<RollingBodyParams>(params));
  if (id == "chaplygin-3d")
    return make_chap3d_model(std::get<RollingBodyParams>(params));
  if (id == "chaplygin-nd")
    return make_chapnd_full_model(std::get<ChapNDParams>(params));
  if (id == "chaplygin-nd-reduced")
    return make_chapnd_reduced_model(std::get<ChapNDParams>(params));
  throw ConfigError("unknown model id '" + id + "'");
}

}  // namespace nonholo

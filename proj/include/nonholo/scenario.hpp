#pragma once

// Scenario files: a small INI dialect describing one simulation run
// (model + parameters, initial state, integrator, observables, diagnostics,
// output paths), plus the runner that executes it.
//
// Syntax: [section] headers, key = value lines, '#' comments, blank lines.
// Vectors are comma lists ("1, 2, 3"); matrices are semicolon-separated rows
// ("1,0; 0,1").  Unknown sections or keys are rejected with file:line
// context.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nonholo/charts.hpp"
#include "nonholo/diagnostics.hpp"
#include "nonholo/errors.hpp"
#include "nonholo/models.hpp"
#include "nonholo/report.hpp"

namespace nonholo {

inline constexpr std::uint64_t kDefaultSeed = 20260815ull;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace detail

// --- INI representation -------------------------------------------------------

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
  mutable bool used = false;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;

  const IniEntry* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.key == key) {
        e.used = true;
        return &e;
      }
    return nullptr;
  }
};

class IniFile {
 public:
  static IniFile parse(std::istream& in, const std::string& source) {
    IniFile f;
    f.source_ = source;
    std::string raw;
    int line = 0;
    IniSection* current = nullptr;
    while (std::getline(in, raw)) {
      ++line;
      const std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string s = detail::trim(raw);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError(f.where(line) + "unterminated section header");
        IniSection sec;
        sec.name = detail::trim(s.substr(1, s.size() - 2));
        sec.line = line;
        if (sec.name.empty())
          throw ConfigError(f.where(line) + "empty section name");
        f.sections_.push_back(std::move(sec));
        current = &f.sections_.back();
        continue;
      }
      const std::size_t eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(f.where(line) + "expected 'key = value'");
      if (!current)
        throw ConfigError(f.where(line) + "key outside any [section]");
      IniEntry e;
      e.key = detail::trim(s.substr(0, eq));
      e.value = detail::trim(s.substr(eq + 1));
      e.line = line;
      if (e.key.empty()) throw ConfigError(f.where(line) + "empty key");
      for (const auto& prev : current->entries)
        if (prev.key == e.key)
          throw ConfigError(f.where(line) + "duplicate key '" + e.key + "'");
      current->entries.push_back(std::move(e));
    }
    return f;
  }

  static IniFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    return parse(in, path);
  }

  const std::string& source() const { return source_; }

  const IniSection* find(const std::string& name) const {
    for (const auto& s : sections_)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::string where(int line) const {
    return source_ + ":" + std::to_string(line) + ": ";
  }

  /// Reject any section or key that was never consumed.
  void reject_unknown(const std::vector<std::string>& known_sections) const {
    for (const auto& sec : sections_) {
      bool known = false;
      for (const auto& name : known_sections)
        if (sec.name == name) known = true;
      if (!known)
        throw ConfigError(where(sec.line) + "unknown section [" + sec.name +
                          "]");
      for (const auto& e : sec.entries)
        if (!e.used)
          throw ConfigError(where(e.line) + "unknown key '" + e.key +
                            "' in [" + sec.name + "]");
    }
  }

  // typed getters ------------------------------------------------------------

  std::optional<std::string> get_string(const std::string& sec,
                                        const std::string& key) const {
    const IniSection* s = find(sec);
    if (!s) return std::nullopt;
    const IniEntry* e = s->find(key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::string require_string(const std::string& sec,
                             const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v)
      throw ConfigError(source_ + ": missing required key '" + key +
                        "' in [" + sec + "]");
    return *v;
  }

  double parse_double(const std::string& sec, const std::string& key,
                      const std::string& text) const {
    const std::string t = detail::trim(text);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size() || t.empty())
      throw ConfigError(source_ + ": [" + sec + "] " + key +
                        ": not a number: '" + text + "'");
    return v;
  }

  std::optional<double> get_double(const std::string& sec,
                                   const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return std::nullopt;
    return parse_double(sec, key, *v);
  }

  std::optional<std::int64_t> get_int(const std::string& sec,
                                      const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return std::nullopt;
    const std::string t = detail::trim(*v);
    std::size_t pos = 0;
    std::int64_t out = 0;
    try {
      out = std::stoll(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size() || t.empty())
      throw ConfigError(source_ + ": [" + sec + "] " + key +
                        ": not an integer: '" + *v + "'");
    return out;
  }

  std::optional<std::uint64_t> get_u64(const std::string& sec,
                                       const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return std::nullopt;
    const std::string t = detail::trim(*v);
    std::size_t pos = 0;
    std::uint64_t out = 0;
    try {
      out = std::stoull(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size() || t.empty())
      throw ConfigError(source_ + ": [" + sec + "] " + key +
                        ": not an unsigned integer: '" + *v + "'");
    return out;
  }

  std::optional<bool> get_bool(const std::string& sec,
                               const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return std::nullopt;
    if (*v == "on" || *v == "true" || *v == "1") return true;
    if (*v == "off" || *v == "false" || *v == "0") return false;
    throw ConfigError(source_ + ": [" + sec + "] " + key +
                      ": expected on/off, got '" + *v + "'");
  }

  std::optional<Vec> get_vec(const std::string& sec,
                             const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return std::nullopt;
    const auto parts = detail::split(*v, ',');
    Vec out(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
      out[int(i)] = parse_double(sec, key, parts[i]);
    return out;
  }

  Vec require_vec(const std::string& sec, const std::string& key,
                  int expected) const {
    auto v = get_vec(sec, key);
    if (!v)
      throw ConfigError(source_ + ": missing required key '" + key +
                        "' in [" + sec + "]");
    if (v->size() != expected)
      throw ConfigError(source_ + ": [" + sec + "] " + key + ": expected " +
                        std::to_string(expected) + " entries, got " +
                        std::to_string(v->size()));
    return *v;
  }

  std::optional<Mat> get_mat(const std::string& sec,
                             const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return std::nullopt;
    const auto rows = detail::split(*v, ';');
    Mat out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto cols = detail::split(rows[r], ',');
      if (r == 0) out.resize(rows.size(), cols.size());
      if (int(cols.size()) != out.cols())
        throw ConfigError(source_ + ": [" + sec + "] " + key +
                          ": ragged matrix rows");
      for (std::size_t c = 0; c < cols.size(); ++c)
        out(int(r), int(c)) = parse_double(sec, key, cols[c]);
    }
    return out;
  }

  std::vector<std::string> get_list(const std::string& sec,
                                    const std::string& key) const {
    auto v = get_string(sec, key);
    if (!v) return {};
    std::vector<std::string> out;
    for (const auto& item : detail::split(*v, ','))
      if (!item.empty()) out.push_back(item);
    return out;
  }

 private:
  std::string source_;
  std::vector<IniSection> sections_;
};

// --- scenario -------------------------------------------------------------------

struct Scenario {
  std::string source;  // file path or synthetic name
  std::string model_id;
  ModelParams params;
  Vec y0;

  IntegrateOptions opt;
  double t_end = 10.0;
  bool projection = true;
  double initial_tolerance = 1e-6;

  std::vector<std::string> observables;  // empty = all model observables

  std::vector<std::string> drift_observables;
  double drift_tolerance = 1e-7;
  bool symmetry_check = false;
  int symmetry_samples = 64;
  double symmetry_radius = 3.0;
  double symmetry_tolerance = 1e-8;
  double symmetry_drift_tolerance = 1e-7;

  std::string csv_path;
  std::string report_path;

  std::uint64_t seed = kDefaultSeed;
  bool seed_set = false;
  std::string seed_source = "default";
};

namespace detail {

inline Mat square_or_diag(const IniFile& f, const std::string& sec,
                          const std::string& key, int n) {
  auto m = f.get_mat(sec, key);
  if (!m)
    throw ConfigError(f.source() + ": missing required key '" + key +
                      "' in [" + sec + "]");
  if (m->rows() == 1 && m->cols() == n) {
    // a plain comma list means the diagonal
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = (*m)(0, i);
    return d;
  }
  if (m->rows() != n || m->cols() != n)
    throw ConfigError(f.source() + ": [" + sec + "] " + key + ": expected " +
                      std::to_string(n) + "x" + std::to_string(n) +
                      " matrix or a " + std::to_string(n) + "-entry diagonal");
  return *m;
}

inline LRParams parse_veselova_params(const IniFile& f) {
  LRParams p;
  const Mat I3 = square_or_diag(f, "model", "inertia", 3);
  const double c = f.get_double("model", "c").value_or(0.0);
  Eigen::Vector3d axis(0.0, 0.0, 1.0);
  if (auto a = f.get_vec("model", "axis")) {
    if (a->size() != 3)
      throw ConfigError(f.source() + ": [model] axis: expected 3 entries");
    axis = Eigen::Vector3d((*a)[0], (*a)[1], (*a)[2]);
  }
  try {
    p = veselova_params(I3, c, axis);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source() + ": [model] " + e.what());
  }
  return p;
}

inline LRParams parse_lr_params(const IniFile& f) {
  LRParams p;
  const auto n = f.get_int("model", "n");
  if (!n) throw ConfigError(f.source() + ": [model] lr-son needs n");
  p.n = int(*n);
  if (p.n < 3) throw ConfigError(f.source() + ": [model] n must be >= 3");
  const Mat J = square_or_diag(f, "model", "J", p.n);
  const auto c = f.get_vec("model", "c");
  if (!c) throw ConfigError(f.source() + ": [model] lr-son needs c");
  p.c = *c;
  for (int j = 1; j <= int(c->size()); ++j) {
    auto a = f.get_mat("model", "a" + std::to_string(j));
    if (!a)
      throw ConfigError(f.source() + ": [model] lr-son needs a" +
                        std::to_string(j) + " matching c");
    if (a->rows() != p.n || a->cols() != p.n)
      throw ConfigError(f.source() + ": [model] a" + std::to_string(j) +
                        " must be " + std::to_string(p.n) + "x" +
                        std::to_string(p.n));
    p.a.push_back(*a);
  }
  try {
    p.inertia = SonInertia::from_J(J);
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source() + ": [model] " + e.what());
  }
  return p;
}

inline RollingBodyParams parse_rolling_params(const IniFile& f, bool ball) {
  RollingBodyParams p;
  p.mass = f.get_double("model", "mass").value_or(1.0);
  p.gravity = f.get_double("model", "gravity").value_or(ball ? 0.0 : 9.81);
  p.inertia = square_or_diag(f, "model", "inertia", 3);
  p.kappa = f.get_double("model", "kappa").value_or(0.0);
  const std::string shape = f.get_string("model", "shape").value_or("sphere");
  if (shape == "sphere") {
    p.shape = RollingBodyParams::Shape::sphere;
    p.radius = f.get_double("model", "radius").value_or(1.0);
  } else if (shape == "ellipsoid") {
    p.shape = RollingBodyParams::Shape::ellipsoid;
    const Vec ax = f.require_vec("model", "semi_axes", 3);
    p.semi_axes = Eigen::Vector3d(ax[0], ax[1], ax[2]);
  } else {
    throw ConfigError(f.source() + ": [model] unknown shape '" + shape + "'");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source() + ": [model] " + e.what());
  }
  return p;
}

inline ChapNDParams parse_chapnd_params(const IniFile& f) {
  ChapNDParams p;
  const auto n = f.get_int("model", "n");
  if (!n) throw ConfigError(f.source() + ": [model] chaplygin-nd needs n");
  p.n = int(*n);
  if (p.n < 3) throw ConfigError(f.source() + ": [model] n must be >= 3");
  p.mass = f.get_double("model", "mass").value_or(1.0);
  p.radius = f.get_double("model", "radius").value_or(1.0);
  const Mat J = square_or_diag(f, "model", "J", p.n);

  if (auto eta = f.get_mat("model", "eta")) {
    if (eta->rows() != p.n || eta->cols() != p.n)
      throw ConfigError(f.source() + ": [model] eta must be " +
                        std::to_string(p.n) + "x" + std::to_string(p.n));
    p.eta = *eta;
  } else {
    // eta_rate + eta_plane = i,j (1-based, both < n) builds a single-plane
    // rotation of the hyperplane
    const double rate = f.get_double("model", "eta_rate").value_or(0.0);
    Mat plane_eta = Mat::Zero(p.n, p.n);
    if (rate != 0.0) {
      const Vec plane = f.require_vec("model", "eta_plane", 2);
      const int i = int(plane[0]) - 1, j = int(plane[1]) - 1;
      if (i < 0 || j < 0 || i >= p.n - 1 || j >= p.n - 1 || i == j)
        throw ConfigError(f.source() +
                          ": [model] eta_plane indices must be distinct and "
                          "< n");
      plane_eta(i, j) = -rate;
      plane_eta(j, i) = rate;
    }
    p.eta = plane_eta;
  }
  try {
    p.inertia = SonInertia::from_J(J);
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.source() + ": [model] " + e.what());
  }
  return p;
}

inline Vec parse_initial_state(const IniFile& f, const std::string& id,
                               const ModelParams& params) {
  if (id == "veselova-3d") {
    const Vec gv = f.require_vec("initial", "gamma", 3);
    const Vec ov = f.require_vec("initial", "Omega", 3);
    LRState st;
    st.gamma = {Mat(hat(Eigen::Vector3d(gv[0], gv[1], gv[2])))};
    st.Omega = hat(Eigen::Vector3d(ov[0], ov[1], ov[2]));
    return lr_pack(st);
  }
  if (id == "lr-son") {
    const LRParams& p = std::get<LRParams>(params);
    const int d = son_dim(p.n);
    Mat g = Mat::Identity(p.n, p.n);
    if (auto gm = f.get_mat("initial", "g")) {
      if (gm->rows() != p.n || gm->cols() != p.n)
        throw ConfigError(f.source() + ": [initial] g must be " +
                          std::to_string(p.n) + "x" + std::to_string(p.n));
      g = reorthonormalize(*gm);
    }
    const Vec ov = f.require_vec("initial", "Omega", d);
    return lr_pack(lr_state_at(p, g, son_unvectorize(ov, p.n)));
  }
  if (id == "rolling-body" || id == "chaplygin-3d") {
    RollingBodyState st;
    const Vec K = f.require_vec("initial", "K", 3);
    const Vec X = f.require_vec("initial", "X", 3);
    const Vec G = f.require_vec("initial", "gamma", 3);
    st.K = Eigen::Vector3d(K[0], K[1], K[2]);
    st.X = Eigen::Vector3d(X[0], X[1], X[2]);
    st.gamma = Eigen::Vector3d(G[0], G[1], G[2]);
    return rolling_pack(st);
  }
  if (id == "chaplygin-nd") {
    const ChapNDParams& p = std::get<ChapNDParams>(params);
    ChapNDFullState st;
    st.x = f.require_vec("initial", "x", p.n);
    st.g = Mat::Identity(p.n, p.n);
    if (auto gm = f.get_mat("initial", "g")) {
      if (gm->rows() != p.n || gm->cols() != p.n)
        throw ConfigError(f.source() + ": [initial] g must be " +
                          std::to_string(p.n) + "x" + std::to_string(p.n));
      st.g = reorthonormalize(*gm);
    }
    st.K = son_unvectorize(f.require_vec("initial", "K", son_dim(p.n)), p.n);
    return chapnd_full_pack(st);
  }
  if (id == "chaplygin-nd-reduced") {
    const ChapNDParams& p = std::get<ChapNDParams>(params);
    const int d = son_dim(p.n);
    ChapNDReducedState st;
    st.K = son_unvectorize(f.require_vec("initial", "K", d), p.n);
    st.X = f.require_vec("initial", "X", p.n);
    st.gamma = f.require_vec("initial", "gamma", p.n);
    if (auto xi = f.get_vec("initial", "Xi")) {
      if (xi->size() != d)
        throw ConfigError(f.source() + ": [initial] Xi: expected " +
                          std::to_string(d) + " entries");
      st.Xi = son_unvectorize(*xi, p.n);
    } else {
      // default: the body frame initially coincides with the space frame
      st.Xi = p.eta;
    }
    return chapnd_reduced_pack(st);
  }
  throw ConfigError(f.source() + ": unknown model id '" + id + "'");
}

}  // namespace detail

inline Scenario parse_scenario(const IniFile& f) {
  Scenario sc;
  sc.source = f.source();
  sc.model_id = f.require_string("model", "id");

  if (sc.model_id == "veselova-3d") {
    sc.params = detail::parse_veselova_params(f);
  } else if (sc.model_id == "lr-son") {
    sc.params = detail::parse_lr_params(f);
  } else if (sc.model_id == "rolling-body") {
    sc.params = detail::parse_rolling_params(f, false);
  } else if (sc.model_id == "chaplygin-3d") {
    sc.params = detail::parse_rolling_params(f, true);
  } else if (sc.model_id == "chaplygin-nd" ||
             sc.model_id == "chaplygin-nd-reduced") {
    sc.params = detail::parse_chapnd_params(f);
  } else {
    throw ConfigError(f.source() + ": unknown model id '" + sc.model_id + "'");
  }

  sc.y0 = detail::parse_initial_state(f, sc.model_id, sc.params);
  sc.initial_tolerance =
      f.get_double("initial", "tolerance").value_or(sc.initial_tolerance);

  if (auto m = f.get_string("integrator", "method"))
    sc.opt.method = method_from_string(*m);
  sc.opt.h = f.get_double("integrator", "h").value_or(sc.opt.h);
  if (!(sc.opt.h > 0.0))
    throw ConfigError(f.source() + ": [integrator] h must be positive");
  sc.t_end = f.get_double("integrator", "t_end").value_or(sc.t_end);
  if (!(sc.t_end > 0.0))
    throw ConfigError(f.source() + ": [integrator] t_end must be positive");
  sc.opt.record_every =
      int(f.get_int("integrator", "record_every").value_or(sc.opt.record_every));
  sc.opt.rtol = f.get_double("integrator", "rtol").value_or(sc.opt.rtol);
  sc.opt.atol = f.get_double("integrator", "atol").value_or(sc.opt.atol);
  sc.projection =
      f.get_bool("integrator", "projection").value_or(sc.projection);

  sc.observables = f.get_list("observables", "list");

  sc.drift_observables = f.get_list("diagnostics", "drift");
  sc.drift_tolerance =
      f.get_double("diagnostics", "drift_tolerance").value_or(sc.drift_tolerance);
  sc.symmetry_check = f.get_bool("diagnostics", "symmetry_check").value_or(false);
  sc.symmetry_samples =
      int(f.get_int("diagnostics", "symmetry_samples").value_or(sc.symmetry_samples));
  sc.symmetry_radius =
      f.get_double("diagnostics", "symmetry_radius").value_or(sc.symmetry_radius);
  sc.symmetry_tolerance =
      f.get_double("diagnostics", "symmetry_tolerance").value_or(sc.symmetry_tolerance);
  sc.symmetry_drift_tolerance = f.get_double("diagnostics", "symmetry_drift_tolerance")
                                .value_or(sc.symmetry_drift_tolerance);

  sc.csv_path = f.get_string("output", "csv").value_or("");
  sc.report_path = f.get_string("output", "report").value_or("");

  if (auto seed = f.get_u64("rng", "seed")) {
    sc.seed = *seed;
    sc.seed_set = true;
    sc.seed_source = "scenario";
  }

  f.reject_unknown({"model", "initial", "integrator", "observables",
                    "diagnostics", "output", "rng"});
  return sc;
}

inline Scenario parse_scenario_file(const std::string& path) {
  return parse_scenario(IniFile::parse_file(path));
}

// --- runner -----------------------------------------------------------------

struct ResidualSummary {
  std::vector<std::pair<std::string, double>> values;
  double max_abs = 0.0;
};

inline ResidualSummary residual_summary(const ModelSystem& model,
                                        const Vec& y) {
  ResidualSummary out;
  out.values = model.residuals(y);
  for (const auto& [name, v] : out.values)
    out.max_abs = std::max(out.max_abs, std::abs(v));
  return out;
}

struct RunResult {
  std::string model_id;
  std::vector<std::string> recorded_observables;
  Trajectory traj;
  ResidualSummary initial_residuals;
  ResidualSummary final_residuals;
  std::vector<DriftReport> drifts;
  std::vector<bool> drift_pass;
  bool symmetry_ran = false;
  ConditionReport symmetry;
  bool all_drifts_pass = true;
};

namespace detail {

/// The chart and generator behind a model's symmetry diagnostic, when it has one.
inline std::pair<MechanicalSystem, VectorFieldOnQ> symmetry_chart(
    const Scenario& sc, std::vector<Vec>& base_points, SymmetryProbe& probe,
    Rng& rng) {
  if (sc.model_id == "veselova-3d") {
    const VeselovaChart chart(std::get<LRParams>(sc.params));
    for (int i = 0; i < 4; ++i)
      base_points.push_back((Vec(3) << rng.uniform(-2.5, 2.5),
                             rng.uniform(0.35, 2.75), rng.uniform(-2.5, 2.5))
                                .finished());
    probe.q0 = (Vec(3) << 0.3, 1.2, -0.4).finished();
    probe.qdot0 = (Vec(3) << 0.4, 0.2, -0.3).finished();
    probe.t_end = 5.0;
    return {chart.system(), chart.generator_field()};
  }
  if (sc.model_id == "rolling-body" || sc.model_id == "chaplygin-3d") {
    const RollingChart chart(std::get<RollingBodyParams>(sc.params));
    for (int i = 0; i < 4; ++i)
      base_points.push_back((Vec(5) << rng.uniform(-1.5, 1.5),
                             rng.uniform(-1.5, 1.5), rng.uniform(-2.5, 2.5),
                             rng.uniform(0.35, 2.75), rng.uniform(-2.5, 2.5))
                                .finished());
    probe.q0 = (Vec(5) << 0.2, -0.1, 0.4, 1.1, -0.2).finished();
    probe.qdot0 = (Vec(5) << 0.1, 0.0, 0.3, 0.2, -0.4).finished();
    probe.t_end = 5.0;
    return {chart.system(), chart.vertical_generator()};
  }
  throw ConfigError(sc.source +
                    ": symmetry diagnostics need a chart-backed model "
                    "(veselova-3d, rolling-body or chaplygin-3d), got '" +
                    sc.model_id + "'");
}

}  // namespace detail

/// Parse-time validation beyond syntax: the initial state must sit on the
/// invariant manifold (after projection when enabled).
inline Vec validated_initial_state(const Scenario& sc,
                                   const ModelSystem& model) {
  if (sc.y0.size() != model.dim)
    throw ConfigError(sc.source + ": initial state has " +
                      std::to_string(sc.y0.size()) + " entries, model needs " +
                      std::to_string(model.dim));
  Vec y0 = sc.y0;
  if (sc.projection) y0 = model.projector(y0);
  const ResidualSummary res = residual_summary(model, y0);
  for (const auto& [name, v] : res.values)
    if (std::abs(v) > sc.initial_tolerance)
      throw ConfigError(sc.source + ": initial state violates invariant '" +
                        name + "' (" + detail::fmt_full(v) + " > " +
                        detail::fmt_full(sc.initial_tolerance) +
                        "); fix the state or enable projection");
  return y0;
}

inline ModelSystem scenario_model(const Scenario& sc) {
  try {
    return make_model(sc.model_id, sc.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(sc.source + ": " + e.what());
  }
}

inline RunResult run_scenario(const Scenario& sc) {
  const ModelSystem model = scenario_model(sc);

  RunResult out;
  out.model_id = model.id;
  out.recorded_observables = sc.observables;
  if (out.recorded_observables.empty())
    for (const auto& [name, fn] : model.observables)
      out.recorded_observables.push_back(name);

  for (const auto& name : sc.drift_observables) {
    bool recorded = false;
    for (const auto& obs : out.recorded_observables)
      if (obs == name) recorded = true;
    if (!recorded)
      throw ConfigError(sc.source + ": drift observable '" + name +
                        "' is not recorded; add it to [observables] list");
  }

  const Vec y0 = validated_initial_state(sc, model);
  out.initial_residuals = residual_summary(model, y0);

  const FlowProblem fp = model.flow(sc.projection, out.recorded_observables);

  std::optional<CsvWriter> csv;
  if (!sc.csv_path.empty()) {
    std::vector<std::string> columns = {"t"};
    columns.insert(columns.end(), model.components.begin(),
                   model.components.end());
    columns.insert(columns.end(), out.recorded_observables.begin(),
                   out.recorded_observables.end());
    csv.emplace(sc.csv_path, columns);
  }
  RecordSink sink;
  if (csv)
    sink = [&csv](double t, const Vec& y, const std::vector<double>& obs) {
      csv->row(t, y, obs);
    };

  out.traj = integrate(fp, y0, 0.0, sc.t_end, sc.opt, sink);
  out.final_residuals = residual_summary(model, out.traj.states.back());

  for (const auto& name : sc.drift_observables) {
    const DriftReport d = drift_report(out.traj, name);
    const bool pass = d.relative_drift <= sc.drift_tolerance;
    out.drifts.push_back(d);
    out.drift_pass.push_back(pass);
    out.all_drifts_pass = out.all_drifts_pass && pass;
  }

  if (sc.symmetry_check) {
    std::vector<Vec> base_points;
    SymmetryProbe probe;
    Rng rng(sc.seed);
    const auto [sys, Y] = detail::symmetry_chart(sc, base_points, probe, rng);
    SymmetryTestOptions opt;
    opt.velocity_samples = sc.symmetry_samples;
    opt.velocity_radius = sc.symmetry_radius;
    opt.tol_structural = sc.symmetry_tolerance;
    opt.tol_drift = sc.symmetry_drift_tolerance;
    opt.seed = sc.seed;
    out.symmetry = classify_generator(sys, Y, base_points, probe, opt);
    out.symmetry_ran = true;
  }

  if (!sc.report_path.empty()) {
    ReportWriter rep("simulation report");
    rep.section("run");
    rep.kv("scenario", sc.source);
    rep.kv("model", model.id);
    rep.kv("dim", model.dim);
    rep.kv("method", method_name(sc.opt.method));
    rep.kv("h", sc.opt.h);
    rep.kv("t_end", sc.t_end);
    rep.kv("record_every", sc.opt.record_every);
    rep.kv("projection", sc.projection ? "on" : "off");
    rep.kv("seed", sc.seed);
    rep.kv("seed_source", sc.seed_source);
    rep.kv("samples", std::int64_t(out.traj.times.size()));

    rep.section("initial_residuals");
    for (const auto& [name, v] : out.initial_residuals.values) rep.kv(name, v);
    rep.section("final_residuals");
    for (const auto& [name, v] : out.final_residuals.values) rep.kv(name, v);

    for (const auto& name : out.recorded_observables) {
      const auto& series = out.traj.series(name);
      double lo = series.front(), hi = series.front();
      for (double v : series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      rep.section("observable " + name);
      rep.kv("initial", series.front());
      rep.kv("final", series.back());
      rep.kv("min", lo);
      rep.kv("max", hi);
    }

    for (std::size_t i = 0; i < out.drifts.size(); ++i) {
      const DriftReport& d = out.drifts[i];
      rep.section("drift " + d.observable);
      rep.kv("initial", d.initial);
      rep.kv("max_drift", d.max_drift);
      rep.kv("relative_drift", d.relative_drift);
      rep.kv("slope", d.slope);
      rep.kv("samples", d.samples);
      rep.kv("tolerance", sc.drift_tolerance);
      rep.status("status", out.drift_pass[i]);
    }

    if (out.symmetry_ran) {
      const ConditionReport& r = out.symmetry;
      rep.section("symmetry_check");
      rep.kv("reaction_pairing_max", r.reaction_pairing_max);
      rep.kv("lifted_derivative_max", r.lifted_derivative_max);
      rep.kv("moving_energy_drift", r.moving_energy_drift);
      rep.kv("horizontality_max", r.horizontality_max);
      rep.kv("invariance_residual_max", r.invariance_residual_max);
      rep.kv("tol_structural", r.options.tol_structural);
      rep.kv("tol_drift", r.options.tol_drift);
      rep.kv("velocity_samples", r.options.velocity_samples);
      rep.kv("velocity_radius", r.options.velocity_radius);
      rep.kv("seed", r.options.seed);
      rep.status("reaction_condition", r.pass_reaction);
      rep.status("lifted_condition", r.pass_lifted);
      rep.status("drift_condition", r.pass_drift);
      rep.status("consistent", r.consistent);
    }
    rep.write(sc.report_path);
  }
  return out;
}

/// Validation-only entry point backing the `check` subcommand.
struct CheckResult {
  std::string model_id;
  int dim = 0;
  ResidualSummary residuals;  // after projection when enabled
  std::vector<std::string> observables;
};

inline CheckResult check_scenario(const Scenario& sc) {
  const ModelSystem model = scenario_model(sc);
  CheckResult out;
  out.model_id = model.id;
  out.dim = model.dim;
  const Vec y0 = validated_initial_state(sc, model);
  out.residuals = residual_summary(model, y0);
  for (const auto& [name, fn] : model.observables)
    out.observables.push_back(name);
  // exercise one derivative evaluation so degenerate parameters surface here
  (void)model.rhs(0.0, y0);
  return out;
}

}  // namespace nonholo

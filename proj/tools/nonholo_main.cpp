// Command-line front end: run scenario files, validate them, or list the
// built-in models.  Exit codes: 0 success, 2 configuration problem,
// 3 numerical/engine failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nonholo/report.hpp"
#include "nonholo/scenario.hpp"

namespace {

struct Overrides {
  std::optional<double> h;
  std::optional<double> t_end;
  std::optional<std::string> method;
  std::optional<std::string> project;
  std::optional<std::string> csv;
  std::optional<std::string> report;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(nonholo::Scenario& sc, const Overrides& ov) {
  if (ov.h) {
    if (!(*ov.h > 0.0)) throw nonholo::ConfigError("--h must be positive");
    sc.opt.h = *ov.h;
  }
  if (ov.t_end) {
    if (!(*ov.t_end > 0.0))
      throw nonholo::ConfigError("--t-end must be positive");
    sc.t_end = *ov.t_end;
  }
  if (ov.method) sc.opt.method = nonholo::method_from_string(*ov.method);
  if (ov.project) sc.projection = (*ov.project == "on");
  if (ov.csv) sc.csv_path = *ov.csv;
  if (ov.report) sc.report_path = *ov.report;

  if (ov.seed) {
    sc.seed = *ov.seed;
    sc.seed_set = true;
    sc.seed_source = "flag";
  } else if (!sc.seed_set) {
    if (const char* env = std::getenv("NONHOLO_SEED")) {
      try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(env, &pos);
        if (pos != std::string(env).size())
          throw std::invalid_argument("trailing characters");
        sc.seed = v;
        sc.seed_set = true;
        sc.seed_source = "env";
      } catch (const std::exception&) {
        throw nonholo::ConfigError(
            std::string("NONHOLO_SEED is not an unsigned integer: '") + env +
            "'");
      }
    }
  }
}

void print_run_summary(const nonholo::Scenario& sc,
                       const nonholo::RunResult& res) {
  using nonholo::detail::fmt_full;
  std::printf("model %s\n", res.model_id.c_str());
  std::printf("method %s h %s t_end %s projection %s seed %llu (%s)\n",
              nonholo::method_name(sc.opt.method), fmt_full(sc.opt.h).c_str(),
              fmt_full(sc.t_end).c_str(), sc.projection ? "on" : "off",
              static_cast<unsigned long long>(sc.seed),
              sc.seed_source.c_str());
  std::printf("samples %zu\n", res.traj.times.size());
  for (const auto& name : res.recorded_observables) {
    const auto& series = res.traj.series(name);
    std::printf("observable %s: initial %s final %s\n", name.c_str(),
                fmt_full(series.front()).c_str(),
                fmt_full(series.back()).c_str());
  }
  for (std::size_t i = 0; i < res.drifts.size(); ++i) {
    const nonholo::DriftReport& d = res.drifts[i];
    std::printf("drift %s: relative %s tolerance %s %s\n",
                d.observable.c_str(), fmt_full(d.relative_drift).c_str(),
                fmt_full(sc.drift_tolerance).c_str(),
                res.drift_pass[i] ? "pass" : "fail");
  }
  if (res.symmetry_ran) {
    const nonholo::ConditionReport& r = res.symmetry;
    std::printf(
        "symmetry: reaction %s lifted %s drift %s horizontality %s invariance "
        "%s\n",
        fmt_full(r.reaction_pairing_max).c_str(),
        fmt_full(r.lifted_derivative_max).c_str(),
        fmt_full(r.moving_energy_drift).c_str(),
        fmt_full(r.horizontality_max).c_str(),
        fmt_full(r.invariance_residual_max).c_str());
    std::printf(
        "symmetry verdict: reaction %s, lifted %s, drift %s, consistent %s\n",
        r.pass_reaction ? "pass" : "fail", r.pass_lifted ? "pass" : "fail",
        r.pass_drift ? "pass" : "fail", r.consistent ? "yes" : "NO");
  }
  std::string final_res = "final residuals:";
  for (const auto& [name, v] : res.final_residuals.values)
    final_res += " " + name + "=" + fmt_full(v);
  std::printf("%s\n", final_res.c_str());
  if (!sc.csv_path.empty())
    std::printf("csv written: %s\n", sc.csv_path.c_str());
  if (!sc.report_path.empty())
    std::printf("report written: %s\n", sc.report_path.c_str());
}

int run_one(const std::string& path, const Overrides& ov, bool quiet) {
  nonholo::Scenario sc = nonholo::parse_scenario_file(path);
  apply_overrides(sc, ov);
  const nonholo::RunResult res = nonholo::run_scenario(sc);
  if (!quiet) print_run_summary(sc, res);
  return 0;
}

int classify_error(const std::exception& e, const std::string& context) {
  if (dynamic_cast<const nonholo::ConfigError*>(&e)) {
    std::fprintf(stderr, "%s: configuration error: %s\n", context.c_str(),
                 e.what());
    return 2;
  }
  std::fprintf(stderr, "%s: numerical failure: %s\n", context.c_str(),
               e.what());
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation and conservation diagnostics for nonholonomic "
               "systems with affine constraints"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Overrides ov;
  std::string path;

  auto add_common = [&ov](CLI::App* cmd) {
    cmd->add_option("--h", ov.h, "integration step size override");
    cmd->add_option("--t-end", ov.t_end, "integration horizon override");
    cmd->add_option("--method", ov.method, "integrator override")
        ->check(CLI::IsMember({"rk4", "rk45"}));
    cmd->add_option("--project", ov.project,
                    "invariant-manifold projection override")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--csv", ov.csv, "trajectory csv path override");
    cmd->add_option("--report", ov.report, "report path override");
    cmd->add_option("--seed", ov.seed, "diagnostics sampling seed override");
  };

  CLI::App* run = app.add_subcommand("run", "execute one scenario file");
  run->add_option("file", path, "scenario file")->required();
  add_common(run);

  CLI::App* batch =
      app.add_subcommand("batch", "execute every *.cfg scenario in a directory");
  batch->add_option("dir", path, "scenario directory")->required();
  add_common(batch);

  CLI::App* check =
      app.add_subcommand("check", "validate a scenario file without running it");
  check->add_option("file", path, "scenario file")->required();
  add_common(check);

  app.add_subcommand("list-models", "print the built-in model identifiers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // bad flags and values are configuration problems; --help stays 0
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("list-models")) {
    for (const auto& id : nonholo::model_ids()) std::printf("%s\n", id.c_str());
    return 0;
  }

  if (app.got_subcommand("run")) {
    try {
      return run_one(path, ov, false);
    } catch (const std::exception& e) {
      return classify_error(e, path);
    }
  }

  if (app.got_subcommand("check")) {
    try {
      nonholo::Scenario sc = nonholo::parse_scenario_file(path);
      apply_overrides(sc, ov);
      const nonholo::CheckResult res = nonholo::check_scenario(sc);
      std::printf("ok %s model %s dim %d\n", path.c_str(),
                  res.model_id.c_str(), res.dim);
      for (const auto& [name, v] : res.residuals.values)
        std::printf("residual %s = %s\n", name.c_str(),
                    nonholo::detail::fmt_full(v).c_str());
      std::string obs = "observables:";
      for (const auto& name : res.observables) obs += " " + name;
      std::printf("%s\n", obs.c_str());
      return 0;
    } catch (const std::exception& e) {
      return classify_error(e, path);
    }
  }

  // batch
  std::vector<std::string> files;
  try {
    for (const auto& entry : std::filesystem::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".cfg")
        files.push_back(entry.path().string());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "%s: configuration error: %s\n", path.c_str(),
                 e.what());
    return 2;
  }
  if (files.empty()) {
    std::fprintf(stderr, "%s: configuration error: no *.cfg scenarios found\n",
                 path.c_str());
    return 2;
  }
  std::sort(files.begin(), files.end());

  int exit_code = 0;
  for (const auto& file : files) {
    int code = 0;
    try {
      code = run_one(file, ov, true);
    } catch (const std::exception& e) {
      code = classify_error(e, file);
    }
    std::printf("%-6s %s\n",
                code == 0 ? "ok" : (code == 2 ? "config" : "error"),
                file.c_str());
    exit_code = std::max(exit_code, code);
  }
  return exit_code;
}

#include "stochrot/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "stochrot/config.hpp"
#include "stochrot/output.hpp"

#ifndef STOCHROT_VERSION
#define STOCHROT_VERSION "unknown"
#endif

namespace stochrot::cli {

namespace {

struct Flags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::string out;
  std::optional<std::uint64_t> decimate;
  std::optional<unsigned> threads;
  std::string backend;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON configuration file")->envname("STOCHROT_CONFIG");
  cmd.add_option("--preset", f.preset, "Built-in preset")->envname("STOCHROT_PRESET");
  cmd.add_option("--seed", f.seed, "Master seed")->envname("STOCHROT_SEED");
  cmd.add_option("--paths", f.paths, "Number of Brownian paths")
      ->envname("STOCHROT_PATHS")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", f.out, "Output directory")->envname("STOCHROT_OUT");
  cmd.add_option("--decimate", f.decimate, "Output every k steps")
      ->envname("STOCHROT_DECIMATE")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--threads", f.threads, "Worker threads (0 = all cores)")
      ->envname("STOCHROT_THREADS");
  cmd.add_option("--backend", f.backend, "auto, scalar, avx2 or neon")
      ->envname("STOCHROT_BACKEND");
}

RunConfig resolve(const Flags& f, bool convergence) {
  const std::optional<std::string> named =
      f.preset.empty() ? std::nullopt : std::optional<std::string>(f.preset);
  RunConfig cfg = f.config.empty() ? (named ? preset(*named) : default_config())
                                   : load_config_file(f.config, named);
  if (f.seed) cfg.integrator.seed = *f.seed;
  if (f.paths) (convergence ? cfg.convergence.n_paths : cfg.ensemble.n_paths) = *f.paths;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.decimate) cfg.integrator.decimate = *f.decimate;
  if (f.threads) cfg.ensemble.threads = *f.threads;
  if (!f.backend.empty()) {
    if (f.backend == "auto") {
      cfg.ensemble.backend.reset();
    } else {
      const auto b = simd::parse_backend(f.backend);
      if (!b) throw ConfigError("--backend: expected auto, scalar, avx2 or neon");
      cfg.ensemble.backend = *b;
    }
  }
  cfg.validate();
  return cfg;
}

struct Admissibility {
  AdmissibilityReport deterministic;
  AdmissibilityReport stochastic;
  bool ok() const { return deterministic.admissible && stochastic.admissible; }
};

Admissibility check_law(const RunConfig& cfg, const DeformationLaw& law) {
  const std::vector<double> grid = uniform_grid(cfg.integrator.t_end, 10001);
  return {check_deterministic_admissible(law, grid), check_stochastic_admissible(law, grid)};
}

nlohmann::json manifest(const RunConfig& cfg, const char* command) {
  nlohmann::json m;
  m["tool"] = "stochrot";
  m["version"] = STOCHROT_VERSION;
  m["command"] = command;
  m["seed"] = cfg.integrator.seed;
  m["generator"] = "philox4x32-10, Box-Muller, truncated at truncation_k";
  m["config"] = to_json(cfg);
  // Where the files went is not part of the run; keeps manifests comparable.
  m["config"].erase("output");
  return m;
}

nlohmann::json events_json(const RunEvents& e) {
  return {{"steps", e.steps},
          {"shrunk_steps", e.shrunk_steps},
          {"substeps", e.substeps},
          {"clamp_events", e.clamp_events},
          {"out_of_bounds", e.out_of_bounds}};
}

nlohmann::json validation_json(const DriftValidationReport& r) {
  return {{"rms_integrated_vs_state", r.rms_integrated_vs_state},
          {"rms_state_vs_integral", r.rms_state_vs_integral},
          {"rms_integrated_vs_integral", r.rms_integrated_vs_integral},
          {"max_identity_gap", r.max_identity_gap},
          {"ito_mean", r.ito_mean},
          {"ito_se", r.ito_se},
          {"martingale_mean", r.martingale_mean},
          {"martingale_se", r.martingale_se}};
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const DeformationLaw law = cfg.law();
  const Admissibility a = check_law(cfg, law);
  out << "law: " << law.description << "\n"
      << "interval: [" << law.lower << ", " << law.upper << "]\n"
      << "deterministic criteria: " << a.deterministic.summary() << "\n"
      << "stochastic criteria: " << a.stochastic.summary() << "\n"
      << (a.ok() ? "admissible" : "NOT admissible") << "\n";
  return a.ok() ? kOk : kInadmissible;
}

int run_ensemble_command(const RunConfig& cfg, bool per_path, const char* command,
                         std::ostream& out, std::ostream& err) {
  const DeformationLaw law = cfg.law();
  const Admissibility a = check_law(cfg, law);
  if (!a.ok()) {
    if (cfg.integrator.boundary_policy == BoundaryPolicy::shrink_step) {
      err << "deformation law is not admissible; shrink-step needs an admissible law "
             "(use clamp-with-log to run anyway)\n"
          << a.deterministic.summary() << "\n"
          << a.stochastic.summary() << "\n";
      return kInadmissible;
    }
    err << "warning: law not admissible, boundary violations will be clamped and logged\n";
  }
  ensure_directory(cfg.output_dir);
  const EllipsoidParams params = cfg.ellipsoid();
  EnsembleConfig ec = cfg.ensemble;
  ec.keep_paths = per_path;
  const EnsembleSummary s = run_ensemble(ec, law, params, cfg.integrator, cfg.omega0);

  const std::filesystem::path dir(cfg.output_dir);
  if (per_path) {
    const double j2_0 = s.validation.j2_initial;
    for (std::size_t p = 0; p < s.paths.size(); ++p)
      write_trajectory_csv((dir / path_file_name(p)).string(), s.paths[p], params, j2_0);
  }
  write_summary_csv((dir / "summary.csv").string(), s);
  nlohmann::json m = manifest(cfg, command);
  m["n_paths"] = s.n_paths;
  m["events"] = events_json(s.events);
  m["drift_validation"] = validation_json(s.validation);
  write_json((dir / "run_manifest.json").string(), m);

  out << "paths: " << s.n_paths << " (" << s.backend << ")\n"
      << "steps: " << s.events.steps << ", shrunk: " << s.events.shrunk_steps
      << ", out of bounds: " << s.events.out_of_bounds
      << ", clamp events: " << s.events.clamp_events << "\n";
  for (const auto& r : s.events.clamp_log)
    out << "  clamped at t=" << format_double(r.t) << " c=" << format_double(r.c_unclamped)
        << "\n";
  out << "drift validation: " << s.validation.summary() << "output: " << cfg.output_dir << "\n";
  return kOk;
}

int cmd_convergence(const RunConfig& cfg, std::ostream& out) {
  const DeformationLaw law = cfg.law();
  IntegratorConfig base = cfg.integrator;
  base.t_end = cfg.convergence.t_end;
  const ConvergenceResult r =
      convergence_study(law, cfg.ellipsoid(), base, cfg.omega0, cfg.convergence.h_list,
                        cfg.convergence.n_paths);
  ensure_directory(cfg.output_dir);
  const std::filesystem::path dir(cfg.output_dir);
  write_convergence_csv((dir / "convergence.csv").string(), r);
  write_convergence_fit_csv((dir / "convergence_fit.csv").string(), r);
  nlohmann::json m = manifest(cfg, "convergence");
  m["slope"] = r.slope;
  write_json((dir / "run_manifest.json").string(), m);
  for (const auto& l : r.levels)
    out << "h=" << format_double(l.h) << " strong_error=" << format_double(l.strong_error)
        << " +/- " << format_double(l.error_se) << "\n";
  out << "slope=" << r.slope << " (95% CI " << r.slope_ci_low << " .. " << r.slope_ci_high
      << "), reference h=" << r.reference_h << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic Euler-Liouville rotation of a deforming ellipsoid", "stochrot"};
  app.set_version_flag("--version", STOCHROT_VERSION);
  app.require_subcommand(1);

  Flags flags;
  CLI::App* check = app.add_subcommand("check", "Check admissibility of the deformation law");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Integrate paths and write one CSV per path plus a summary");
  CLI::App* ensemble =
      app.add_subcommand("ensemble", "Integrate an ensemble and write the summary only");
  CLI::App* convergence =
      app.add_subcommand("convergence", "Strong-convergence study over convergence.h_list");
  for (CLI::App* c : {check, simulate, ensemble, convergence}) add_flags(*c, flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const bool conv = convergence->parsed();
    const RunConfig cfg = resolve(flags, conv);
    if (check->parsed()) return cmd_check(cfg, out);
    if (simulate->parsed()) return run_ensemble_command(cfg, true, "simulate", out, err);
    if (ensemble->parsed()) return run_ensemble_command(cfg, false, "ensemble", out, err);
    return cmd_convergence(cfg, out);
  } catch (const IntegrationAborted& e) {
    err << "integration aborted: " << e.what() << "\n";
    return kAborted;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace stochrot::cli

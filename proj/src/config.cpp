#include "stochrot/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace stochrot {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(std::string(section) + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const char* section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(section) + "." + key + ": wrong type");
  }
}

double read_t_end(const json& j, double current, const char* section) {
  if (j.contains("t_end") && j.contains("t_end_days"))
    throw ConfigError(std::string(section) + ": give t_end or t_end_days, not both");
  double t = current;
  read(j, "t_end", t, section);
  if (j.contains("t_end_days")) {
    double days = 0.0;
    read(j, "t_end_days", days, section);
    t = days * kDay;
  }
  return t;
}

std::string read_string(const json& j, const char* key, const char* section) {
  std::string s;
  read(j, key, s, section);
  return s;
}

}  // namespace

EllipsoidParams RunConfig::ellipsoid() const {
  return EllipsoidParams::from_axes(a0, c0, mass, d_min, d_max);
}

ToyModelParams RunConfig::toy() const {
  ToyModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.c0 = c0;
  p.d_min = d_min;
  p.d_max = d_max;
  return p;
}

DeformationLaw RunConfig::law() const { return make_law(toy(), law_spec); }

void RunConfig::validate() const {
  try {
    if (!(a0 > 0.0) || !std::isfinite(a0)) throw std::invalid_argument("a0 must be positive");
    ellipsoid().validate();
    toy().validate();
    integrator.validate();
    ensemble.validate();
    for (double w : omega0)
      if (!std::isfinite(w)) throw std::invalid_argument("omega0 must be finite");
    if (convergence.n_paths < 2) throw std::invalid_argument("convergence.n_paths must be >= 2");
    if (!(convergence.t_end > 0.0)) throw std::invalid_argument("convergence.t_end must be positive");
    for (double h : convergence.h_list)
      if (!(h > 0.0)) throw std::invalid_argument("convergence.h_list entries must be positive");
    if (output_dir.empty()) throw std::invalid_argument("output.dir must not be empty");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

RunConfig default_config() {
  RunConfig c;
  c.name = "custom";
  c.a0 = 1.0;
  c.c0 = std::sqrt(298.0 / 300.0);
  c.mass = 1.0;
  c.d_max = c.a0 - c.c0;
  c.d_min = -c.d_max;
  c.alpha = 1e-3;
  c.beta = 1e-4;
  c.gamma = 10.0;
  c.omega0 = {5e-7, 0.0, 1.0};
  c.integrator.h = 1e-4;
  c.integrator.t_end = kDay;
  c.integrator.seed = 20240101;
  c.integrator.truncation_k = 6.0;
  c.integrator.boundary_policy = BoundaryPolicy::shrink_step;
  c.integrator.decimate = 10;
  c.ensemble.n_paths = 1;
  c.ensemble.scenario = Scenario::custom;
  return c;
}

std::vector<std::string> preset_names() {
  return {"deterministic-1day", "deterministic-7day", "stochastic-1day", "stochastic-7day",
          "rigid-precession"};
}

RunConfig preset(const std::string& name) {
  RunConfig c = default_config();
  c.name = name;
  if (name == "rigid-precession") {
    c.alpha = 0.0;
    c.beta = 0.0;
    c.law_spec.drift = DriftForm::zero;
    c.law_spec.diffusion = DiffusionForm::zero;
    c.integrator.t_end = 299.0 * kDay;
    c.integrator.decimate = 1000;
    c.ensemble.observables = {Observable::omega1, Observable::omega2, Observable::omega3};
    return c;
  }
  const auto scenario = parse_scenario(name);
  if (!scenario || *scenario == Scenario::custom) throw ConfigError("unknown preset '" + name + "'");
  c.ensemble.scenario = *scenario;
  const bool stochastic =
      *scenario == Scenario::stochastic_1day || *scenario == Scenario::stochastic_7day;
  const bool week =
      *scenario == Scenario::deterministic_7day || *scenario == Scenario::stochastic_7day;
  if (!stochastic) c.beta = 0.0;
  c.integrator.t_end = (week ? 7.0 : 1.0) * kDay;
  return c;
}

void apply_json(RunConfig& cfg, const json& j) {
  check_keys(j, "config",
             {"preset", "name", "ellipsoid", "deformation", "rotation", "integrator", "ensemble",
              "convergence", "output"});
  read(j, "name", cfg.name, "config");
  if (j.contains("ellipsoid")) {
    const json& e = j["ellipsoid"];
    check_keys(e, "ellipsoid", {"a0", "c0", "mass", "d_min", "d_max"});
    read(e, "a0", cfg.a0, "ellipsoid");
    read(e, "c0", cfg.c0, "ellipsoid");
    read(e, "mass", cfg.mass, "ellipsoid");
    read(e, "d_min", cfg.d_min, "ellipsoid");
    read(e, "d_max", cfg.d_max, "ellipsoid");
  }
  if (j.contains("deformation")) {
    const json& d = j["deformation"];
    check_keys(d, "deformation",
               {"alpha", "beta", "gamma", "drift", "drift_coef", "diffusion", "diffusion_coef"});
    read(d, "alpha", cfg.alpha, "deformation");
    read(d, "beta", cfg.beta, "deformation");
    read(d, "gamma", cfg.gamma, "deformation");
    read(d, "drift_coef", cfg.law_spec.drift_coef, "deformation");
    read(d, "diffusion_coef", cfg.law_spec.diffusion_coef, "deformation");
    if (d.contains("drift")) {
      const auto f = parse_drift_form(read_string(d, "drift", "deformation"));
      if (!f) throw ConfigError("deformation.drift: unknown form");
      cfg.law_spec.drift = *f;
    }
    if (d.contains("diffusion")) {
      const auto f = parse_diffusion_form(read_string(d, "diffusion", "deformation"));
      if (!f) throw ConfigError("deformation.diffusion: unknown form");
      cfg.law_spec.diffusion = *f;
    }
  }
  if (j.contains("rotation")) {
    const json& r = j["rotation"];
    check_keys(r, "rotation", {"omega0"});
    read(r, "omega0", cfg.omega0, "rotation");
  }
  if (j.contains("integrator")) {
    const json& i = j["integrator"];
    check_keys(i, "integrator",
               {"h", "t_end", "t_end_days", "seed", "truncation_k", "boundary_policy", "decimate",
                "max_halvings"});
    read(i, "h", cfg.integrator.h, "integrator");
    cfg.integrator.t_end = read_t_end(i, cfg.integrator.t_end, "integrator");
    read(i, "seed", cfg.integrator.seed, "integrator");
    read(i, "truncation_k", cfg.integrator.truncation_k, "integrator");
    read(i, "decimate", cfg.integrator.decimate, "integrator");
    read(i, "max_halvings", cfg.integrator.max_halvings, "integrator");
    if (i.contains("boundary_policy")) {
      const std::string p = read_string(i, "boundary_policy", "integrator");
      if (p == "shrink-step")
        cfg.integrator.boundary_policy = BoundaryPolicy::shrink_step;
      else if (p == "clamp-with-log")
        cfg.integrator.boundary_policy = BoundaryPolicy::clamp_with_log;
      else
        throw ConfigError("integrator.boundary_policy: expected shrink-step or clamp-with-log");
    }
  }
  if (j.contains("ensemble")) {
    const json& e = j["ensemble"];
    check_keys(e, "ensemble", {"n_paths", "observables", "threads", "backend", "scenario"});
    read(e, "n_paths", cfg.ensemble.n_paths, "ensemble");
    read(e, "threads", cfg.ensemble.threads, "ensemble");
    if (e.contains("observables")) {
      std::vector<std::string> names;
      read(e, "observables", names, "ensemble");
      cfg.ensemble.observables.clear();
      for (const auto& n : names) {
        const auto o = parse_observable(n);
        if (!o) throw ConfigError("ensemble.observables: unknown observable '" + n + "'");
        cfg.ensemble.observables.push_back(*o);
      }
    }
    if (e.contains("backend")) {
      const std::string b = read_string(e, "backend", "ensemble");
      if (b == "auto") {
        cfg.ensemble.backend.reset();
      } else {
        const auto parsed = simd::parse_backend(b);
        if (!parsed) throw ConfigError("ensemble.backend: expected auto, scalar, avx2 or neon");
        cfg.ensemble.backend = *parsed;
      }
    }
    if (e.contains("scenario")) {
      const auto s = parse_scenario(read_string(e, "scenario", "ensemble"));
      if (!s) throw ConfigError("ensemble.scenario: unknown scenario");
      cfg.ensemble.scenario = *s;
    }
  }
  if (j.contains("convergence")) {
    const json& c = j["convergence"];
    check_keys(c, "convergence", {"h_list", "n_paths", "t_end", "t_end_days"});
    read(c, "h_list", cfg.convergence.h_list, "convergence");
    read(c, "n_paths", cfg.convergence.n_paths, "convergence");
    cfg.convergence.t_end = read_t_end(c, cfg.convergence.t_end, "convergence");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"dir"});
    read(o, "dir", cfg.output_dir, "output");
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["ellipsoid"] = {{"a0", c.a0}, {"c0", c.c0}, {"mass", c.mass}, {"d_min", c.d_min},
                    {"d_max", c.d_max}};
  j["deformation"] = {{"alpha", c.alpha},
                      {"beta", c.beta},
                      {"gamma", c.gamma},
                      {"drift", to_string(c.law_spec.drift)},
                      {"drift_coef", c.law_spec.drift_coef},
                      {"diffusion", to_string(c.law_spec.diffusion)},
                      {"diffusion_coef", c.law_spec.diffusion_coef}};
  j["rotation"] = {{"omega0", c.omega0}};
  j["integrator"] = {{"h", c.integrator.h},
                     {"t_end", c.integrator.t_end},
                     {"seed", c.integrator.seed},
                     {"truncation_k", c.integrator.truncation_k},
                     {"boundary_policy", to_string(c.integrator.boundary_policy)},
                     {"decimate", c.integrator.decimate},
                     {"max_halvings", c.integrator.max_halvings}};
  std::vector<std::string> obs;
  for (Observable o : c.ensemble.observables) obs.emplace_back(to_string(o));
  j["ensemble"] = {{"n_paths", c.ensemble.n_paths},
                   {"observables", obs},
                   {"threads", c.ensemble.threads},
                   {"backend", c.ensemble.backend ? simd::to_string(*c.ensemble.backend) : "auto"},
                   {"scenario", to_string(c.ensemble.scenario)}};
  j["convergence"] = {{"h_list", c.convergence.h_list},
                      {"n_paths", c.convergence.n_paths},
                      {"t_end", c.convergence.t_end}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

RunConfig load_config_file(const std::string& path,
                           const std::optional<std::string>& preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
  if (j.contains("preset") && !j["preset"].is_string())
    throw ConfigError("config.preset: wrong type");
  RunConfig cfg = default_config();
  if (preset_override)
    cfg = preset(*preset_override);
  else if (j.contains("preset"))
    cfg = preset(j["preset"].get<std::string>());
  apply_json(cfg, j);
  return cfg;
}

}  // namespace stochrot

#include "stochrot/deformation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stochrot/formulas.hpp"

namespace stochrot {

void ToyModelParams::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
  if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
  if (!(d_min < 0.0) || !(d_max > 0.0))
    throw std::invalid_argument("need d_min < 0 < d_max");
  if (!(c0 + d_min > 0.0)) throw std::invalid_argument("c0 + d_min must be positive");
}

double toy_drift(const ToyModelParams& p, double t, double x) {
  return formulas::boundary_poly(p.alpha * std::cos(p.gamma * t), x, p.lower(), p.upper());
}

double toy_diffusion(const ToyModelParams& p, double x) {
  return formulas::boundary_poly(p.beta, x, p.lower(), p.upper());
}

DeformationLaw make_toy_law(const ToyModelParams& p) {
  p.validate();
  DeformationLaw law;
  law.lower = p.lower();
  law.upper = p.upper();
  law.drift = [p](double t, double c) { return toy_drift(p, t, c); };
  law.deterministic = p.beta == 0.0;
  if (law.deterministic) {
    law.diffusion = [](double, double) { return 0.0; };
  } else {
    law.diffusion = [p](double, double c) { return toy_diffusion(p, c); };
  }
  law.toy = p;
  std::ostringstream os;
  os << "toy(alpha=" << p.alpha << ", beta=" << p.beta << ", gamma=" << p.gamma << ")";
  law.description = os.str();
  return law;
}

DeformationLaw make_law(const ToyModelParams& p, const LawSpec& spec) {
  if (spec.drift == DriftForm::toy && spec.diffusion == DiffusionForm::toy)
    return make_toy_law(p);

  p.validate();
  DeformationLaw law;
  const double lo = p.lower();
  const double hi = p.upper();
  law.lower = lo;
  law.upper = hi;

  const double a = spec.drift_coef;
  switch (spec.drift) {
    case DriftForm::toy:
      law.drift = [p](double t, double c) { return toy_drift(p, t, c); };
      break;
    case DriftForm::zero:
      law.drift = [](double, double) { return 0.0; };
      break;
    case DriftForm::constant:
      law.drift = [a](double, double) { return a; };
      break;
    case DriftForm::restoring: {
      const double mid = 0.5 * (lo + hi);
      law.drift = [a, mid](double, double c) { return a * (mid - c); };
      break;
    }
  }

  const double b = spec.diffusion_coef;
  law.deterministic = false;
  switch (spec.diffusion) {
    case DiffusionForm::toy:
      law.diffusion = [p](double, double c) { return toy_diffusion(p, c); };
      law.deterministic = p.beta == 0.0;
      break;
    case DiffusionForm::zero:
      law.diffusion = [](double, double) { return 0.0; };
      law.deterministic = true;
      break;
    case DiffusionForm::constant:
      law.diffusion = [b](double, double) { return b; };
      law.deterministic = b == 0.0;
      break;
    case DiffusionForm::linear_lower:
      law.diffusion = [b, lo](double, double c) { return b * (c - lo); };
      law.deterministic = b == 0.0;
      break;
    case DiffusionForm::linear_upper:
      law.diffusion = [b, hi](double, double c) { return b * (hi - c); };
      law.deterministic = b == 0.0;
      break;
  }

  std::ostringstream os;
  os << "drift=" << to_string(spec.drift) << "(" << a << "), diffusion="
     << to_string(spec.diffusion) << "(" << b << ")";
  law.description = os.str();
  return law;
}

const char* to_string(DriftForm f) {
  switch (f) {
    case DriftForm::toy: return "toy";
    case DriftForm::zero: return "zero";
    case DriftForm::constant: return "constant";
    case DriftForm::restoring: return "restoring";
  }
  return "?";
}

const char* to_string(DiffusionForm f) {
  switch (f) {
    case DiffusionForm::toy: return "toy";
    case DiffusionForm::zero: return "zero";
    case DiffusionForm::constant: return "constant";
    case DiffusionForm::linear_lower: return "linear_lower";
    case DiffusionForm::linear_upper: return "linear_upper";
  }
  return "?";
}

std::optional<DriftForm> parse_drift_form(const std::string& s) {
  for (auto f : {DriftForm::toy, DriftForm::zero, DriftForm::constant, DriftForm::restoring})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

std::optional<DiffusionForm> parse_diffusion_form(const std::string& s) {
  for (auto f : {DiffusionForm::toy, DiffusionForm::zero, DiffusionForm::constant,
                 DiffusionForm::linear_lower, DiffusionForm::linear_upper})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

bool toy_structurally_admissible(const ToyModelParams& p) {
  return p.alpha >= 0.0 && p.beta >= 0.0 && p.c0 + p.d_min > 0.0 && p.d_min < 0.0 &&
         p.d_max > 0.0;
}

namespace {

void check_drift(const DeformationLaw& law, double t, AdmissibilityReport& r) {
  const double f_lo = law.drift(t, law.lower);
  const double f_hi = law.drift(t, law.upper);
  if (!(f_lo >= 0.0))
    r.violations.push_back({t, Boundary::lower, Violation::Kind::drift_sign, f_lo});
  if (!(f_hi <= 0.0))
    r.violations.push_back({t, Boundary::upper, Violation::Kind::drift_sign, f_hi});
}

void check_diffusion(const DeformationLaw& law, double t, AdmissibilityReport& r) {
  const double g_lo = law.diffusion(t, law.lower);
  const double g_hi = law.diffusion(t, law.upper);
  if (g_lo != 0.0)
    r.violations.push_back({t, Boundary::lower, Violation::Kind::diffusion_nonzero, g_lo});
  if (g_hi != 0.0)
    r.violations.push_back({t, Boundary::upper, Violation::Kind::diffusion_nonzero, g_hi});
}

AdmissibilityReport check(const DeformationLaw& law, std::span<const double> t_grid,
                          bool stochastic) {
  if (t_grid.empty()) throw std::invalid_argument("admissibility check needs a time grid");
  AdmissibilityReport r;
  r.stochastic = stochastic;
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("admissibility grid times must be >= 0");
    check_drift(law, t, r);
    if (stochastic) check_diffusion(law, t, r);
    ++r.points_checked;
  }
  r.admissible = r.violations.empty();
  r.structurally_proven = law.toy.has_value() && toy_structurally_admissible(*law.toy);
  return r;
}

}  // namespace

AdmissibilityReport check_deterministic_admissible(const DeformationLaw& law,
                                                   std::span<const double> t_grid) {
  return check(law, t_grid, false);
}

AdmissibilityReport check_stochastic_admissible(const DeformationLaw& law,
                                                std::span<const double> t_grid) {
  return check(law, t_grid, true);
}

std::string AdmissibilityReport::summary() const {
  std::ostringstream os;
  os << (stochastic ? "stochastic" : "deterministic") << " criterion: "
     << (admissible ? "admissible" : "NOT admissible") << " (" << points_checked
     << " grid times";
  if (structurally_proven) os << ", proven for all t by factored form";
  os << ")";
  std::size_t shown = 0;
  for (const auto& v : violations) {
    if (shown++ == 8) {
      os << "\n  ... " << violations.size() - 8 << " more";
      break;
    }
    os << "\n  violation at t=" << v.t << ": "
       << (v.boundary == Boundary::lower ? "lower" : "upper") << " boundary, "
       << (v.kind == Violation::Kind::drift_sign ? "drift points outward"
                                                 : "diffusion does not vanish")
       << " (value " << v.value << ")";
  }
  return os.str();
}

std::vector<double> uniform_grid(double t_max, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = 0.0;
    return g;
  }
  for (std::size_t i = 0; i < n; ++i)
    g[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

}  // namespace stochrot

#include "stochrot/output.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace stochrot {

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void put(std::string& line, double x) {
  line += format_double(x);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const EllipsoidParams& params, double j2_initial) {
  std::ofstream out = open_for_write(path);
  std::string line;
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) {
    if (i) line += ',';
    line += kTrajectoryColumns[i];
  }
  out << line << '\n';
  for (const Sample& s : traj.samples) {
    const SampleRow r = derive_row(s, params, j2_initial);
    const double values[16] = {r.t,        r.c,        r.c_minus_c0, r.a_sq,         r.i1,
                               r.i3,       r.omega[0], r.omega[1],   r.omega[2],     r.l[0],
                               r.l[1],     r.l[2],     r.h,          r.j2,           r.j2_minus_j20,
                               r.f_geo};
    line.clear();
    for (int i = 0; i < 16; ++i) {
      if (i) line += ',';
      put(line, values[i]);
    }
    out << line << '\n';
  }
  finish(out, path);
}

void write_summary_csv(const std::string& path, const EnsembleSummary& s) {
  std::ofstream out = open_for_write(path);
  std::string line = "t";
  for (Observable o : s.observables) {
    line += ',';
    line += to_string(o);
    line += "_mean,";
    line += to_string(o);
    line += "_se";
  }
  const std::pair<const char*, const SeriesStats*> drift[] = {
      {"J2_minus_J20", &s.drift.j2_change},
      {"drift_integral", &s.drift.drift_integral},
      {"ito_term", &s.drift.ito_term},
      {"martingale", &s.drift.martingale},
      {"drift_residual", &s.drift.residual}};
  for (const auto& [name, _] : drift) {
    line += ',';
    line += name;
    line += "_mean,";
    line += name;
    line += "_se";
  }
  line += ",drift_residual_in_se";
  out << line << '\n';

  const std::vector<double> z = s.drift.residual_in_se();
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    line.clear();
    put(line, s.times[t]);
    for (const SeriesStats& st : s.stats) {
      line += ',';
      put(line, st.mean[t]);
      line += ',';
      put(line, st.std_error[t]);
    }
    for (const auto& [_, st] : drift) {
      line += ',';
      put(line, st->mean[t]);
      line += ',';
      put(line, st->std_error[t]);
    }
    line += ',';
    put(line, z[t]);
    out << line << '\n';
  }
  finish(out, path);
}

void write_convergence_csv(const std::string& path, const ConvergenceResult& r) {
  std::ofstream out = open_for_write(path);
  out << "h,strong_error,error_se\n";
  for (const auto& l : r.levels)
    out << format_double(l.h) << ',' << format_double(l.strong_error) << ','
        << format_double(l.error_se) << '\n';
  finish(out, path);
}

void write_convergence_fit_csv(const std::string& path, const ConvergenceResult& r) {
  std::ofstream out = open_for_write(path);
  out << "slope,slope_ci_low,slope_ci_high,reference_h\n"
      << format_double(r.slope) << ',' << format_double(r.slope_ci_low) << ','
      << format_double(r.slope_ci_high) << ',' << format_double(r.reference_h) << '\n';
  finish(out, path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir + "'");
}

std::string path_file_name(std::size_t path_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "path_%05zu.csv", path_index);
  return buf;
}

}  // namespace stochrot

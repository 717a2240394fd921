#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spps/engine.hpp"
#include "spps/errors.hpp"
#include "spps/numerics.hpp"
#include "spps/scenario.hpp"
#include "spps/tomography.hpp"
#include "spps/version.hpp"
#include "spps/wigner.hpp"

namespace spps {

namespace detail {

inline std::string trim(std::string_view sv) {
  std::size_t b = 0, e = sv.size();
  while (b < e && std::isspace(static_cast<unsigned char>(sv[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(sv[e - 1]))) --e;
  return std::string(sv.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view sv, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= sv.size(); ++i) {
    if (i == sv.size() || sv[i] == sep) {
      out.push_back(trim(sv.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline double parse_number(const std::string& text, long line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) throw parse_error("trailing characters after number '" + text + "'", line);
    return v;
  } catch (const parse_error&) {
    throw;
  } catch (const std::exception&) {
    throw parse_error("expected a number, got '" + text + "'", line);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario configuration files: flat `key = value` text with '#' comments and
// unit-suffixed key names.

struct ParsedConfig {
  ScenarioConfig scenario;
  std::map<std::string, double> keys;  // every key as parsed, for overrides
  std::string raw_text;                // exact file content, feeds the digest
};

inline ParsedConfig parse_scenario_config(std::istream& in) {
  std::map<std::string, double> kv;
  std::map<std::string, long> key_line;
  std::ostringstream raw;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    raw << line << '\n';
    const auto hash = line.find('#');
    std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw parse_error("expected 'key = value'", lineno);
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key.empty()) throw parse_error("empty key", lineno);
    if (kv.count(key)) throw parse_error("duplicate key '" + key + "'", lineno);
    kv[key] = detail::parse_number(value, lineno);
    key_line[key] = lineno;
  }

  auto require = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw parse_error(std::string("missing required key '") + key + "'");
    return it->second;
  };

  const double mass = require("mass_kg");
  const double wavelength = require("wavelength_nm") * 1e-9;
  const double radius = require("radius_mm") * 1e-3;
  const double omega_orbit = require("omega_orbit_hz") * 2.0 * std::numbers::pi;
  const double omega_trans = require("omega_transverse_hz") * 2.0 * std::numbers::pi;
  const double sigma_x = require("sigma_x_um") * 1e-6;
  const double sigma_v = require("sigma_p_mm_per_s") * 1e-3;  // sigma_p / m
  const double eta = require("eta");
  const double atom_number = require("atom_number");

  ParsedConfig out{
      ScenarioConfig{
          make_constants(mass, wavelength),
          make_guide(radius, omega_orbit, omega_trans),
          CorrelatedGaussianState(sigma_x, mass * sigma_v, eta, atom_number),
          PulsePair{},
      },
      std::move(kv),
      raw.str(),
  };

  // Optional pulse defaults; CLI flags override these.
  const double phi_deg = out.keys.count("phi_deg") ? out.keys.at("phi_deg") : 38.0;
  const double tau_max = (out.keys.count("tau_max_us") ? out.keys.at("tau_max_us") : 200.0) * 1e-6;
  const int points =
      out.keys.count("tau_points") ? static_cast<int>(out.keys.at("tau_points")) : 60;
  if (points < 2) throw parse_error("tau_points must be at least 2");
  if (!(tau_max > 0.0)) throw parse_error("tau_max_us must be positive");
  out.scenario.pulse_pair.phi = deg_to_rad(phi_deg);
  out.scenario.pulse_pair.tau_grid.resize(points);
  for (int i = 0; i < points; ++i)
    out.scenario.pulse_pair.tau_grid[i] = tau_max * static_cast<double>(i) / (points - 1);
  out.scenario.validate();
  return out;
}

inline ParsedConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file '" + path + "'");
  try {
    return parse_scenario_config(in);
  } catch (const validation_error& e) {
    throw parse_error("config '" + path + "': " + e.what());
  } catch (const parse_error& e) {
    throw parse_error("config '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run manifests. Every emitted file names the tool version and the digest of
// the run that produced it in its first header line.

struct RunManifest {
  std::string command;
  std::string flags;        // canonical rendering of the effective options
  std::string config_path;
  std::string output_dir;
  std::string timestamp;    // excluded from the determinism contract
  std::string digest;       // fnv1a64 over command + flags + config bytes

  static RunManifest make(std::string command, std::string flags, std::string config_path,
                          std::string output_dir, std::string_view config_bytes,
                          std::string timestamp) {
    RunManifest m;
    m.command = std::move(command);
    m.flags = std::move(flags);
    m.config_path = std::move(config_path);
    m.output_dir = std::move(output_dir);
    m.timestamp = std::move(timestamp);
    m.digest = num::hex64(num::fnv1a64(m.command + '\n' + m.flags + '\n' +
                                       std::string(config_bytes)));
    return m;
  }

  std::vector<std::string> header_lines() const {
    std::vector<std::string> lines;
    lines.push_back("spps " + std::string(kVersion) + " | " + command +
                    (flags.empty() ? "" : " " + flags) + " | manifest " + digest);
    if (!timestamp.empty()) lines.push_back("generated " + timestamp);
    return lines;
  }
};

// ---------------------------------------------------------------------------
// CSV emission and ingestion. Bodies are deterministic; header comment lines
// carry the manifest.

inline void write_csv(std::ostream& out, const std::vector<std::string>& header_comments,
                      const std::string& column_header,
                      const std::vector<std::vector<double>>& rows, int precision = 10) {
  for (const auto& line : header_comments) out << "# " << line << '\n';
  out << column_header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << num::format_double(row[i], precision);
    }
    out << '\n';
  }
}

inline void write_csv_file(const std::string& path,
                           const std::vector<std::string>& header_comments,
                           const std::string& column_header,
                           const std::vector<std::vector<double>>& rows, int precision = 10) {
  std::ofstream out(path);
  if (!out) throw error("cannot write '" + path + "'");
  write_csv(out, header_comments, column_header, rows, precision);
}

/// Read a decay CSV (`tau_us,gamma[,sigma_gamma]`); '#' lines are skipped.
inline DecayCurve read_decay_csv(std::istream& in, double phi = 0.0) {
  DecayCurve curve;
  curve.phi = phi;
  curve.source = DecaySource::ingested;
  std::string line;
  long lineno = 0;
  bool header_seen = false;
  bool has_sigma = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    if (!header_seen) {
      const auto cols = detail::split(body, ',');
      if (cols.size() < 2 || cols[0] != "tau_us" || cols[1] != "gamma")
        throw parse_error("expected header 'tau_us,gamma[,sigma_gamma]'", lineno);
      if (cols.size() == 3 && cols[2] == "sigma_gamma") has_sigma = true;
      else if (cols.size() > 2) throw parse_error("unexpected extra columns", lineno);
      header_seen = true;
      continue;
    }
    const auto cols = detail::split(body, ',');
    if (cols.size() != (has_sigma ? 3u : 2u))
      throw parse_error("expected " + std::to_string(has_sigma ? 3 : 2) + " columns", lineno);
    DecaySample s;
    s.tau = detail::parse_number(cols[0], lineno) * 1e-6;
    s.gamma = detail::parse_number(cols[1], lineno);
    if (has_sigma) s.sigma_gamma = detail::parse_number(cols[2], lineno);
    curve.samples.push_back(s);
  }
  if (!header_seen) throw parse_error("empty decay file");
  if (curve.samples.empty()) throw parse_error("decay file has a header but no rows");
  curve.validate();
  return curve;
}

inline DecayCurve load_decay_csv(const std::string& path, double phi = 0.0) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open decay file '" + path + "'");
  try {
    return read_decay_csv(in, phi);
  } catch (const parse_error& e) {
    throw parse_error("decay file '" + path + "': " + e.what());
  } catch (const validation_error& e) {
    throw parse_error("decay file '" + path + "': " + e.what());
  }
}

inline void write_decay_csv(const std::string& path, const DecayCurve& curve,
                            const std::vector<std::string>& header_comments) {
  bool has_sigma = !curve.samples.empty();
  for (const auto& s : curve.samples)
    if (!s.sigma_gamma) has_sigma = false;
  std::vector<std::vector<double>> rows;
  rows.reserve(curve.samples.size());
  for (const auto& s : curve.samples) {
    std::vector<double> row{s.tau * 1e6, s.gamma};
    if (has_sigma) row.push_back(*s.sigma_gamma);
    rows.push_back(std::move(row));
  }
  write_csv_file(path, header_comments,
                 has_sigma ? "tau_us,gamma,sigma_gamma" : "tau_us,gamma", rows);
}

/// Read a projection CSV (`theta_deg,s,density`), rows grouped by angle.
inline ProjectionSet read_projections_csv(std::istream& in) {
  std::string line;
  long lineno = 0;
  bool header_seen = false;
  std::vector<ProjectionProfile> profiles;
  ProjectionProfile current;
  bool open_group = false;
  double current_theta_deg = 0.0;

  auto close_group = [&]() {
    if (!open_group) return;
    if (current.s.size() < 2) throw parse_error("projection group with fewer than 2 samples");
    detail::finish_profile(current);
    profiles.push_back(std::move(current));
    current = ProjectionProfile{};
    open_group = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    if (!header_seen) {
      const auto cols = detail::split(body, ',');
      if (cols.size() != 3 || cols[0] != "theta_deg" || cols[1] != "s" || cols[2] != "density")
        throw parse_error("expected header 'theta_deg,s,density'", lineno);
      header_seen = true;
      continue;
    }
    const auto cols = detail::split(body, ',');
    if (cols.size() != 3) throw parse_error("expected 3 columns", lineno);
    const double theta_deg = detail::parse_number(cols[0], lineno);
    const double s = detail::parse_number(cols[1], lineno);
    const double density = detail::parse_number(cols[2], lineno);
    if (density < 0.0) throw parse_error("negative density", lineno);
    if (!open_group || theta_deg != current_theta_deg) {
      close_group();
      current_theta_deg = theta_deg;
      current.theta = deg_to_rad(theta_deg);
      open_group = true;
    }
    if (!current.s.empty() && !(s > current.s.back()))
      throw parse_error("s must increase within an angle group", lineno);
    current.s.push_back(s);
    current.density.push_back(density);
  }
  if (!header_seen) throw parse_error("empty projections file");
  close_group();
  return ProjectionSet::from_profiles(std::move(profiles));
}

inline ProjectionSet load_projections_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open projections file '" + path + "'");
  try {
    return read_projections_csv(in);
  } catch (const parse_error& e) {
    throw parse_error("projections file '" + path + "': " + e.what());
  } catch (const validation_error& e) {
    throw parse_error("projections file '" + path + "': " + e.what());
  }
}

inline void write_projections_csv(const std::string& path, const ProjectionSet& set,
                                  const std::vector<std::string>& header_comments) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : set.profiles())
    for (std::size_t i = 0; i < p.s.size(); ++i)
      rows.push_back({rad_to_deg(p.theta), p.s[i], p.density[i]});
  write_csv_file(path, header_comments, "theta_deg,s,density", rows);
}

inline void write_wigner_csv(const std::string& path, const WignerGrid& grid,
                             const std::vector<std::string>& header_comments) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(grid.n_x()) * grid.n_p());
  for (int i = 0; i < grid.n_x(); ++i)
    for (int j = 0; j < grid.n_p(); ++j)
      rows.push_back({grid.x_tilde(i), grid.p_tilde(j), grid.value(i, j)});
  write_csv_file(path, header_comments, "x_tilde,p_tilde,value", rows, 8);
}

// ---------------------------------------------------------------------------
// Analysis report: `key = value` structured text.

inline void write_report(std::ostream& out, const AnalysisReport& rep,
                         const std::vector<std::string>& header_comments) {
  for (const auto& line : header_comments) out << "# " << line << '\n';
  out << "phi_deg = " << num::format_double(rad_to_deg(rep.phi)) << '\n';
  out << "phi_source = " << (rep.phi_defaulted ? "default-critical-angle" : "given") << '\n';
  out << "tau_c_us = " << num::format_double(rep.tau_c * 1e6) << '\n';
  out << "eta_hat = " << num::format_double(rep.eta_hat) << '\n';
  out << "one_minus_eta = " << num::format_double(rep.one_minus_eta) << '\n';
  out << "area_hbar = " << num::format_double(rep.area_hbar) << '\n';
  out << "area_max_hbar = " << num::format_double(rep.area_max_hbar) << '\n';
  out << "coherence_length_um = " << num::format_double(rep.coherence_length * 1e6) << '\n';
  out << "transverse_bound_us = " << num::format_double(rep.transverse_bound * 1e6) << '\n';
  out << "phase_space_cells = " << num::format_double(rep.cells) << '\n';
  out << "infeasible = " << (rep.infeasible ? "true" : "false") << '\n';
  if (!rep.note.empty()) out << "note = " << rep.note << '\n';
  out << "inputs_digest = " << rep.inputs_digest << '\n';
}

inline void write_report_file(const std::string& path, const AnalysisReport& rep,
                              const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  if (!out) throw error("cannot write '" + path + "'");
  write_report(out, rep, header_comments);
}

}  // namespace spps

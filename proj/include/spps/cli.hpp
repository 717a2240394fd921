#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spps/engine.hpp"
#include "spps/errors.hpp"
#include "spps/io.hpp"
#include "spps/kinematics.hpp"
#include "spps/scenario.hpp"
#include "spps/svg.hpp"
#include "spps/tomography.hpp"
#include "spps/version.hpp"

namespace spps {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidity = 3;
inline constexpr int kExitInfeasible = 4;

namespace cli_detail {

inline std::string utc_timestamp_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw error("cannot create output directory '" + dir + "'");
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SimulateOptions {
  std::string config_path;
  std::string out_dir = ".";
  double phi_deg = 0.0;
  bool phi_given = false;
  double tau_max = 0.0;
  bool tau_max_given = false;
  int points = 0;
  bool points_given = false;
  std::string engine = "closed";
  bool svg = false;
};

inline int cmd_simulate_decay(const SimulateOptions& opt, std::ostream& out) {
  const ParsedConfig cfg = load_scenario_config(opt.config_path);
  const double phi =
      opt.phi_given ? deg_to_rad(opt.phi_deg) : cfg.scenario.pulse_pair.phi;

  std::vector<double> tau_grid;
  if (opt.tau_max_given || opt.points_given) {
    const double tau_max =
        opt.tau_max_given ? opt.tau_max : cfg.scenario.pulse_pair.tau_grid.back();
    const int n = opt.points_given ? opt.points
                                   : static_cast<int>(cfg.scenario.pulse_pair.tau_grid.size());
    if (!(tau_max > 0.0)) throw validation_error("simulate-decay: tau-max must be positive");
    tau_grid.resize(n);
    for (int i = 0; i < n; ++i) tau_grid[i] = tau_max * static_cast<double>(i) / (n - 1);
  } else {
    tau_grid = cfg.scenario.pulse_pair.tau_grid;
  }

  const Engine engine = opt.engine == "quad" ? Engine::quadrature : Engine::closed_form;
  const DecayCurve curve = simulate_decay(cfg.scenario, phi, tau_grid, engine);
  const CoherenceFit fit = fit_coherence_time(curve);

  std::ostringstream flags;
  flags << "--phi=" << num::format_double(rad_to_deg(phi)) << " --tau-max="
        << num::format_double(tau_grid.back()) << " --points=" << tau_grid.size()
        << " --engine=" << opt.engine;
  const RunManifest manifest = RunManifest::make("simulate-decay", flags.str(), opt.config_path,
                                                 opt.out_dir, cfg.raw_text, utc_timestamp_now());

  ensure_dir(opt.out_dir);
  const std::string csv_path = join_path(opt.out_dir, "decay.csv");
  write_decay_csv(csv_path, curve, manifest.header_lines());
  out << "wrote " << csv_path << '\n';

  if (opt.svg) {
    svg::Series sim;
    sim.label = "simulated";
    sim.markers = true;
    for (const auto& s : curve.samples) {
      sim.x.push_back(s.tau * 1e6);
      sim.y.push_back(s.gamma);
    }
    svg::Series fitted;
    fitted.label = "gaussian fit";
    fitted.color = "#d62728";
    for (int i = 0; i < 200; ++i) {
      const double t = tau_grid.back() * i / 199.0;
      fitted.x.push_back(t * 1e6);
      fitted.y.push_back(fit.amplitude * std::exp(-(t * t) / (fit.tau_c * fit.tau_c)));
    }
    const std::string svg_path = join_path(opt.out_dir, "decay.svg");
    svg::write_line_plot(svg_path, "pump-probe decay, phi = " +
                             num::format_double(rad_to_deg(phi), 4) + " deg",
                         "tau (us)", "gamma", {sim, fitted}, manifest.header_lines());
    out << "wrote " << svg_path << '\n';
  }

  out << "tau_c = " << num::format_double(fit.tau_c * 1e6, 6) << " us +/- "
      << num::format_double(fit.tau_c_err * 1e6, 3) << " us (amplitude "
      << num::format_double(fit.amplitude, 4) << ", residual rms "
      << num::format_double(fit.residual_rms, 3) << ")\n";
  return kExitSuccess;
}

struct SweepOptions {
  std::string config_path;
  std::string out_dir = ".";
  double phi_min_deg = 1.0;
  double phi_max_deg = 60.0;
  double step_deg = 0.5;
  bool svg = false;
};

/// Fitted coherence time at one beam angle; falls back to the closed form
/// when the validity window cuts the decay off before it can be fitted.
inline double fitted_tau_c(const ScenarioConfig& cfg, double phi, double tau_c_analytic) {
  const double tau_valid = 0.95 * kMaxRotationAngle / cfg.guide.orbital_freq;
  const double tau_max = std::min(2.5 * tau_c_analytic, tau_valid);
  std::vector<double> grid(32);
  for (int i = 0; i < 32; ++i) grid[i] = tau_max * i / 31.0;
  try {
    const DecayCurve curve = simulate_decay(cfg, phi, grid, Engine::closed_form);
    return fit_coherence_time(curve).tau_c;
  } catch (const fit_error&) {
    return tau_c_analytic;
  }
}

inline int cmd_sweep_angle(const SweepOptions& opt, std::ostream& out) {
  if (!(opt.step_deg > 0.0)) throw validation_error("sweep-angle: step must be positive");
  if (!(opt.phi_max_deg >= opt.phi_min_deg))
    throw validation_error("sweep-angle: phi-max must be >= phi-min");
  if (!(std::abs(opt.phi_min_deg) < 180.0) || !(std::abs(opt.phi_max_deg) < 180.0))
    throw validation_error("sweep-angle: angles must lie inside (-180, 180) deg");

  const ParsedConfig cfg = load_scenario_config(opt.config_path);

  std::vector<std::vector<double>> rows;
  double best_phi = opt.phi_min_deg;
  double best_tau = -1.0;
  for (double phi_deg = opt.phi_min_deg; phi_deg <= opt.phi_max_deg + 1e-9 * opt.step_deg;
       phi_deg += opt.step_deg) {
    const double phi = deg_to_rad(phi_deg);
    const double tau_analytic = closed_form_coherence_time(cfg.scenario, phi);
    const double tau_eta0 = closed_form_coherence_time(cfg.scenario, phi, 0.0);
    const double tau_fit = fitted_tau_c(cfg.scenario, phi, tau_analytic);
    rows.push_back({phi_deg, tau_fit * 1e6, tau_analytic * 1e6, tau_eta0 * 1e6});
    if (tau_fit > best_tau) {
      best_tau = tau_fit;
      best_phi = phi_deg;
    }
  }

  std::ostringstream flags;
  flags << "--phi-min=" << num::format_double(opt.phi_min_deg)
        << " --phi-max=" << num::format_double(opt.phi_max_deg)
        << " --step=" << num::format_double(opt.step_deg);
  const RunManifest manifest = RunManifest::make("sweep-angle", flags.str(), opt.config_path,
                                                 opt.out_dir, cfg.raw_text, utc_timestamp_now());

  ensure_dir(opt.out_dir);
  const std::string csv_path = join_path(opt.out_dir, "sweep.csv");
  write_csv_file(csv_path, manifest.header_lines(),
                 "phi_deg,tau_c_us,tau_c_analytic_us,tau_c_eta0_us", rows);
  out << "wrote " << csv_path << '\n';

  if (opt.svg) {
    svg::Series fit_s{"fitted", "#1f77b4", {}, {}, true};
    svg::Series ana{"correlated beam", "#d62728", {}, {}, false};
    svg::Series eta0{"uncorrelated ensemble", "#7f7f7f", {}, {}, false};
    for (const auto& r : rows) {
      fit_s.x.push_back(r[0]);
      fit_s.y.push_back(r[1]);
      ana.x.push_back(r[0]);
      ana.y.push_back(r[2]);
      eta0.x.push_back(r[0]);
      eta0.y.push_back(r[3]);
    }
    const std::string svg_path = join_path(opt.out_dir, "sweep.svg");
    svg::write_line_plot(svg_path, "coherence time vs beam angle", "phi (deg)", "tau_c (us)",
                         {fit_s, ana, eta0}, manifest.header_lines());
    out << "wrote " << svg_path << '\n';
  }

  out << "maximum tau_c = " << num::format_double(best_tau * 1e6, 6) << " us at phi = "
      << num::format_double(best_phi, 6) << " deg\n";
  return kExitSuccess;
}

struct AnalyzeOptions {
  std::string config_path;
  std::string out_dir = ".";
  double tau_c = 0.0;
  bool tau_c_given = false;
  std::string data_path;
  double phi_deg = 0.0;
  bool phi_given = false;
};

inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  const ParsedConfig cfg = load_scenario_config(opt.config_path);

  double tau_c = opt.tau_c;
  std::string tau_source = "given";
  if (!opt.data_path.empty()) {
    const DecayCurve curve = load_decay_csv(opt.data_path);
    const CoherenceFit fit = fit_coherence_time(curve);
    tau_c = fit.tau_c;
    tau_source = "fit of " + opt.data_path;
    out << "fitted tau_c = " << num::format_double(tau_c * 1e6, 6) << " us +/- "
        << num::format_double(fit.tau_c_err * 1e6, 3) << " us\n";
  }

  const bool phi_defaulted = !opt.phi_given;
  const double phi =
      opt.phi_given ? deg_to_rad(opt.phi_deg) : critical_angle(cfg.scenario);

  std::ostringstream flags;
  flags << "--tau-c=" << num::format_double(tau_c) << " --phi="
        << num::format_double(rad_to_deg(phi)) << " [tau_c " << tau_source << "]";
  const RunManifest manifest = RunManifest::make("analyze", flags.str(), opt.config_path,
                                                 opt.out_dir, cfg.raw_text, utc_timestamp_now());

  AnalysisReport rep = infer_state_from_tau_c(cfg.scenario, phi, tau_c, manifest.digest);
  rep.phi_defaulted = phi_defaulted;

  ensure_dir(opt.out_dir);
  const std::string report_path = join_path(opt.out_dir, "report.txt");
  write_report_file(report_path, rep, manifest.header_lines());
  out << "wrote " << report_path << '\n';
  out << "one_minus_eta = " << num::format_double(rep.one_minus_eta, 6) << '\n';
  out << "area = " << num::format_double(rep.area_hbar, 6) << " hbar (max "
      << num::format_double(rep.area_max_hbar, 6) << " hbar)\n";
  out << "coherence_length = " << num::format_double(rep.coherence_length * 1e6, 6) << " um\n";
  if (rep.infeasible) {
    out << "inference infeasible: " << rep.note << '\n';
    return kExitInfeasible;
  }
  return kExitSuccess;
}

struct ReconstructOptions {
  std::string projections_path;
  std::string out_dir = ".";
  int grid_n = 256;
  bool svg = false;
};

inline int cmd_reconstruct(const ReconstructOptions& opt, std::ostream& out) {
  const std::string raw = read_file_bytes(opt.projections_path);
  const ProjectionSet set = [&] {
    std::istringstream stream(raw);
    try {
      return read_projections_csv(stream);
    } catch (const parse_error& e) {
      throw parse_error("projections file '" + opt.projections_path + "': " + e.what());
    } catch (const validation_error& e) {
      throw parse_error("projections file '" + opt.projections_path + "': " + e.what());
    }
  }();

  const FbpResult result = fbp_reconstruct(set, opt.grid_n, opt.grid_n);
  const GridMoments m = moments(result.grid);

  std::ostringstream flags;
  flags << "--grid=" << opt.grid_n;
  const RunManifest manifest = RunManifest::make("reconstruct", flags.str(),
                                                 opt.projections_path, opt.out_dir, raw,
                                                 utc_timestamp_now());

  ensure_dir(opt.out_dir);
  const std::string csv_path = join_path(opt.out_dir, "wigner.csv");
  write_wigner_csv(csv_path, result.grid, manifest.header_lines());
  out << "wrote " << csv_path << '\n';

  const std::string moments_path = join_path(opt.out_dir, "moments.txt");
  {
    std::ofstream mo(moments_path);
    if (!mo) throw error("cannot write '" + moments_path + "'");
    for (const auto& line : manifest.header_lines()) mo << "# " << line << '\n';
    mo << "n_angles = " << set.n_angles() << '\n';
    mo << "mean_x_tilde = " << num::format_double(m.mean_x) << '\n';
    mo << "mean_p_tilde = " << num::format_double(m.mean_p) << '\n';
    mo << "var_x_tilde = " << num::format_double(m.var_x) << '\n';
    mo << "var_p_tilde = " << num::format_double(m.var_p) << '\n';
    mo << "eta_hat = " << num::format_double(m.corr) << '\n';
    for (const auto& w : result.warnings) mo << "warning = " << w << '\n';
  }
  out << "wrote " << moments_path << '\n';

  if (opt.svg) {
    const std::string svg_path = join_path(opt.out_dir, "wigner.svg");
    svg::write_heatmap(svg_path, result.grid, manifest.header_lines());
    out << "wrote " << svg_path << '\n';
  }

  for (const auto& w : result.warnings) out << "warning: " << w << '\n';
  out << "eta_hat = " << num::format_double(m.corr, 6) << '\n';
  return kExitSuccess;
}

struct PropagateOptions {
  std::string config_path;
  std::string out_dir = ".";
  double t_max = 0.0;
  int points = 50;
  bool svg = false;
};

inline int cmd_propagate(const PropagateOptions& opt, std::ostream& out) {
  if (!(opt.t_max >= 0.0)) throw validation_error("propagate: t-max must be non-negative");
  const ParsedConfig cfg = load_scenario_config(opt.config_path);
  const double mass = cfg.scenario.constants.atom_mass;
  const double hbar = cfg.scenario.constants.hbar;

  const int n = opt.t_max == 0.0 ? 1 : opt.points;
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : opt.t_max * static_cast<double>(i) / (n - 1);
    const CorrelatedGaussianState s = propagate(cfg.scenario.beam, t, mass);
    rows.push_back({t * 1e3, s.sigma_x() * 1e6, s.eta(), phase_space_area(s, hbar)});
  }

  std::ostringstream flags;
  flags << "--t-max=" << num::format_double(opt.t_max) << " --points=" << n;
  const RunManifest manifest = RunManifest::make("propagate", flags.str(), opt.config_path,
                                                 opt.out_dir, cfg.raw_text, utc_timestamp_now());

  ensure_dir(opt.out_dir);
  const std::string csv_path = join_path(opt.out_dir, "propagate.csv");
  write_csv_file(csv_path, manifest.header_lines(), "t_ms,sigma_x_um,eta,area_hbar", rows);
  out << "wrote " << csv_path << '\n';

  if (opt.svg) {
    svg::Series width{"sigma_x", "#1f77b4", {}, {}, false};
    for (const auto& r : rows) {
      width.x.push_back(r[0]);
      width.y.push_back(r[1]);
    }
    const std::string svg_path = join_path(opt.out_dir, "propagate.svg");
    svg::write_line_plot(svg_path, "ballistic expansion", "t (ms)", "sigma_x (um)", {width},
                         manifest.header_lines());
    out << "wrote " << svg_path << '\n';
  }

  out << "final sigma_x = " << num::format_double(rows.back()[1], 6) << " um, eta = "
      << num::format_double(rows.back()[2], 9) << '\n';
  return kExitSuccess;
}

}  // namespace cli_detail

/// Full command-line front end. Returns the process exit code:
/// 0 success, 2 usage or parse failure, 3 model-validity violation,
/// 4 fit or inversion infeasibility.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superradiant pump-probe spectroscopy of a guided atom beam: simulate decay "
               "signals, sweep geometry, invert coherence times, and reconstruct the "
               "Wigner function from projections"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  cli_detail::SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate-decay", "Simulate a pump-probe decay curve");
  sim_cmd->add_option("--config", sim.config_path, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--phi", sim.phi_deg, "Beam angle (deg)")
      ->check(CLI::Range(-179.999, 179.999));
  sim_cmd->add_option("--tau-max", sim.tau_max, "Largest pump-probe delay (s)");
  sim_cmd->add_option("--points", sim.points, "Number of delays")->check(CLI::Range(4, 100000));
  sim_cmd->add_option("--engine", sim.engine, "Evaluation engine")
      ->check(CLI::IsMember({"closed", "quad"}));
  sim_cmd->add_option("--out", sim.out_dir, "Output directory");
  sim_cmd->add_flag("--svg", sim.svg, "Also emit an SVG plot");

  cli_detail::SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-angle", "Coherence time vs beam angle");
  sweep_cmd->add_option("--config", sweep.config_path, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--phi-min", sweep.phi_min_deg, "Sweep start (deg)");
  sweep_cmd->add_option("--phi-max", sweep.phi_max_deg, "Sweep end (deg)");
  sweep_cmd->add_option("--step", sweep.step_deg, "Sweep step (deg)")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep.out_dir, "Output directory");
  sweep_cmd->add_flag("--svg", sweep.svg, "Also emit an SVG plot");

  cli_detail::AnalyzeOptions ana;
  auto* ana_cmd = app.add_subcommand("analyze", "Infer beam state from a coherence time");
  ana_cmd->add_option("--config", ana.config_path, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* tau_opt = ana_cmd->add_option("--tau-c", ana.tau_c, "Measured 1/e coherence time (s)")
                      ->check(CLI::PositiveNumber);
  auto* data_opt = ana_cmd->add_option("--data", ana.data_path, "Decay CSV to fit instead")
                       ->check(CLI::ExistingFile);
  tau_opt->excludes(data_opt);
  ana_cmd->add_option("--phi", ana.phi_deg, "Beam angle of the measurement (deg)")
      ->check(CLI::Range(-89.999, 89.999));
  ana_cmd->add_option("--out", ana.out_dir, "Output directory");

  cli_detail::ReconstructOptions rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Filtered back-projection from projections");
  rec_cmd->add_option("--projections", rec.projections_path, "Projections CSV")
      ->required()
      ->check(CLI::ExistingFile);
  rec_cmd->add_option("--grid", rec.grid_n, "Output grid size per axis")
      ->check(CLI::Range(16, 4096));
  rec_cmd->add_option("--out", rec.out_dir, "Output directory");
  rec_cmd->add_flag("--svg", rec.svg, "Also emit an SVG heatmap");

  cli_detail::PropagateOptions prop;
  auto* prop_cmd = app.add_subcommand("propagate", "Ballistic expansion of the beam state");
  prop_cmd->add_option("--config", prop.config_path, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  prop_cmd->add_option("--t-max", prop.t_max, "Total propagation time (s)")
      ->check(CLI::NonNegativeNumber);
  prop_cmd->add_option("--points", prop.points, "Number of rows")->check(CLI::Range(1, 1000000));
  prop_cmd->add_option("--out", prop.out_dir, "Output directory");
  prop_cmd->add_flag("--svg", prop.svg, "Also emit an SVG plot");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("spps");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    sim.phi_given = sim_cmd->count("--phi") > 0;
    sim.tau_max_given = sim_cmd->count("--tau-max") > 0;
    sim.points_given = sim_cmd->count("--points") > 0;
    ana.tau_c_given = ana_cmd->count("--tau-c") > 0;
    ana.phi_given = ana_cmd->count("--phi") > 0;

    if (app.got_subcommand(sim_cmd)) return cli_detail::cmd_simulate_decay(sim, out);
    if (app.got_subcommand(sweep_cmd)) return cli_detail::cmd_sweep_angle(sweep, out);
    if (app.got_subcommand(ana_cmd)) {
      if (!ana.tau_c_given && ana.data_path.empty())
        throw CLI::RequiredError("analyze: one of --tau-c or --data");
      return cli_detail::cmd_analyze(ana, out);
    }
    if (app.got_subcommand(rec_cmd)) return cli_detail::cmd_reconstruct(rec, out);
    if (app.got_subcommand(prop_cmd)) return cli_detail::cmd_propagate(prop, out);
    throw CLI::RequiredError("subcommand");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const parse_error& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const unit_error& e) {
    err << "unit error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const validity_error& e) {
    err << "validity error: " << e.what() << '\n';
    return kExitValidity;
  } catch (const resolution_error& e) {
    err << "resolution error: " << e.what() << '\n';
    return kExitValidity;
  } catch (const fit_error& e) {
    err << "fit error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const infeasible_error& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const validation_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidity;
  }
}

}  // namespace spps

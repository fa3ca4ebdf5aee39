#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <ridebot/equilibrium.hpp>

#include "config.hpp"
#include "svg.hpp"

namespace ridebot::cli {

namespace fs = std::filesystem;

namespace {

// Flags shared by every subcommand; unset ones leave the config alone.
struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::string> scheme;
  std::optional<double> nu, nu_P, nu_I, v0, dt;
  std::optional<int> segments;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "configuration file (key = value, [sections])");
    app->add_option("--out", out, "output directory");
    app->add_option("--scheme", scheme, "baseline|hics1|hics2|hacs1|hacs2|hacs3");
    app->add_option("--nu", nu, "impedance sensitivity (HICS-1/2)");
    app->add_option("--nu-p", nu_P, "proportional admittance sensitivity (HACS-1/3)");
    app->add_option("--nu-i", nu_I, "integral admittance sensitivity (HACS-2/3)");
    app->add_option("--v0", v0, "initial cruise speed [m/s]");
    app->add_option("--dt", dt, "simulation step [s]");
    app->add_option("--segments", segments, "collocation segments");
    app->add_option("--workers", workers, "sweep worker threads (0: all cores)");
    app->add_option("--seed", seed, "seed for randomised solver restarts");
  }

  [[nodiscard]] RunConfig build() const {
    RunConfig cfg;
    if (!config.empty()) apply_config_file(cfg, config);
    if (!out.empty()) cfg.out = out;
    if (scheme) cfg.scheme = *scheme;
    if (nu) cfg.nu = *nu;
    if (nu_P) cfg.nu_P = *nu_P;
    if (nu_I) cfg.nu_I = *nu_I;
    if (v0) cfg.v0 = *v0;
    if (dt) cfg.sim.dt = *dt;
    if (segments) cfg.segments = *segments;
    if (workers) cfg.workers = *workers;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void echo_config(const RunConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  write_text(cfg.out / "config.ini", os.str());
}

std::string metrics_block(const BrakingMetrics& m) {
  std::ostringstream os;
  os << "J = " << format_double(m.J) << '\n'
     << "torso_ROM_deg = " << format_double(m.torso_ROM_deg) << '\n'
     << "max_tau_p = " << format_double(m.max_tau_p) << '\n'
     << "L_m = " << format_double(m.L) << '\n'
     << "T_s = " << format_double(m.T) << '\n';
  return os.str();
}

MetricsRow label_row(const ControlScheme& s) {
  MetricsRow r;
  r.scheme = s.name();
  r.param_name = s.sensitivity_name();
  r.param_value = s.sensitivity().value_or(0.0);
  return r;
}

int cmd_simulate(const RunConfig& cfg, const std::string& replay, std::ostream& out,
                 std::ostream& err) {
  const ControlScheme sch = cfg.control_scheme();
  const Gains g = cfg.gains();
  Equilibrium eq;
  try {
    eq = find_equilibrium(sch, g, cfg.model, cfg.v0);
  } catch (const EquilibriumError& e) {
    err << "no cruise equilibrium at v0 = " << cfg.v0 << " m/s: " << e.what() << '\n';
    return kExitFailure;
  }

  RiderPolicy rider;
  std::string rider_name = cfg.rider;
  if (!replay.empty()) {
    const Trajectory src = read_trajectory_csv(fs::path(replay));
    std::vector<double> u;
    u.reserve(src.size());
    for (const auto& in : src.inputs) u.push_back(in.tau_R);
    rider = tabulated_rider(src.t, std::move(u));
    rider_name = "replay of " + replay;
  } else if (cfg.rider == "hold") {
    const double hold = eq.tau_R_hold;
    rider = [hold](double, const PlanarState&) { return hold; };
  } else if (cfg.rider == "stiff") {
    rider = stiff_torso_rider();
  } else {
    rider = passive_rider();
  }

  fs::create_directories(cfg.out);
  echo_config(cfg);
  const SimResult res = simulate(eq.state, rider, sch, g, cfg.model, cfg.sim, eq.controller);
  write_trajectory_csv(cfg.out / "trajectory.csv", res.trajectory);

  std::ostringstream summary;
  summary << "scheme = " << sch.name() << '\n';
  if (sch.sensitivity()) {
    summary << sch.sensitivity_name() << " = " << short_number(*sch.sensitivity()) << '\n';
  }
  summary << "v0 = " << short_number(cfg.v0) << '\n'
          << "rider = " << rider_name << '\n'
          << "status = " << to_string(res.status) << '\n'
          << "saturated = " << (res.any_saturated ? "yes" : "no") << '\n';
  if (!res.diagnostic.empty()) summary << "diagnostic = " << res.diagnostic << '\n';

  int code = kExitOk;
  if (res.status == SimStatus::kOk) {
    MetricsRow row = label_row(sch);
    try {
      row.metrics = compute_metrics(res.trajectory, cfg.weights, cfg.model);
      row.status = "ok";
      summary << metrics_block(row.metrics);
    } catch (const NoStopDetected& e) {
      const double nan = std::nan("");
      row.metrics = {nan, nan, nan, nan, nan};
      row.status = "no_stop";
      summary << "metrics = none (" << e.what() << ")\n";
    }
    std::ostringstream csv;
    write_metrics_csv_header(csv);
    write_metrics_csv_row(csv, row);
    write_text(cfg.out / "metrics.csv", csv.str());
  } else {
    err << "simulation " << to_string(res.status) << ": " << res.diagnostic << '\n';
    code = kExitFailure;
  }
  write_text(cfg.out / "summary.txt", summary.str());
  out << summary.str();
  return code;
}

void write_condition(const fs::path& dir, const SweepRow& r, const RiderBallbotParams& p) {
  fs::create_directories(dir);
  if (!r.solution) return;
  write_trajectory_csv(dir / "trajectory.csv", r.solution->trajectory);
  write_trajectory_csv(dir / "knots.csv", r.solution->knots);
  write_text(dir / "panels.svg",
             trajectory_panels(r.row.scheme + " " + r.row.param_name + " = " +
                                   short_number(r.row.param_value) + " (" + r.row.status + ")",
                               r.solution->trajectory, p));
}

std::string row_line(const SweepRow& r) {
  std::ostringstream os;
  os << r.row.scheme << ' ' << r.row.param_name << '=' << short_number(r.row.param_value)
     << "  J=" << format_double(r.row.metrics.J) << "  " << r.row.status
     << "  iterations=" << r.iterations;
  if (r.solution) os << "  t_F=" << format_double(r.solution->t_F);
  return os.str();
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ControlScheme sch = cfg.control_scheme();
  if (sch.has_integral()) {
    err << "scheme " << sch.name()
        << " carries integral state and cannot be transcribed; use baseline, hics1, hics2 or "
           "hacs1\n";
    return kExitUsage;
  }
  SweepOptions opt = cfg.sweep_options();
  opt.schemes = {sch.name()};
  opt.sensitivities = {sch.sensitivity().value_or(0.0)};
  opt.workers = 1;
  const auto rows = run_sweep(opt, cfg.model, cfg.gains(), cfg.weights);
  const SweepRow& r = rows.front();

  fs::create_directories(cfg.out);
  echo_config(cfg);
  write_sweep_csv(cfg.out / "metrics.csv", rows);
  write_condition(cfg.out, r, cfg.model);

  std::ostringstream summary;
  summary << row_line(r) << '\n';
  if (r.solution) {
    summary << "message = " << r.solution->message << '\n'
            << "J_star = " << format_double(r.solution->J_star) << '\n'
            << "kkt_residual = " << format_double(r.kkt_residual) << '\n'
            << "max_defect = " << format_double(r.max_defect) << '\n'
            << metrics_block(r.row.metrics);
  }
  write_text(cfg.out / "summary.txt", summary.str());
  out << summary.str();
  if (!r.converged) {
    err << "optimization did not converge: " << r.row.status << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto rows = run_sweep(cfg.sweep_options(), cfg.model, cfg.gains(), cfg.weights);
  fs::create_directories(cfg.out);
  echo_config(cfg);
  write_sweep_csv(cfg.out / "sweep.csv", rows);
  write_text(cfg.out / "J_vs_sensitivity.svg", sweep_plot(rows));
  int converged = 0;
  for (const SweepRow& r : rows) {
    write_condition(cfg.out / condition_directory(r.row), r, cfg.model);
    out << row_line(r) << '\n';
    converged += r.converged ? 1 : 0;
  }
  out << converged << " of " << rows.size() << " conditions converged\n";
  if (converged == 0) {
    err << "no condition converged\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_metrics(const RunConfig& cfg, const std::string& path, const std::string& label,
                double onset, bool weights_given, std::ostream& out, std::ostream& err) {
  const Trajectory traj = read_trajectory_csv(fs::path(path));
  StopCriterion c;
  c.onset_time = onset;
  MetricsRow row;
  row.scheme = label;
  row.param_name = "none";
  row.param_value = 0.0;
  try {
    row.metrics = compute_metrics(traj, cfg.weights, cfg.model, c);
  } catch (const NoStopDetected& e) {
    err << "no stop detected: " << e.what() << '\n';
    return kExitFailure;
  }
  row.status = "ok";
  out << "# weights (" << (weights_given ? "given" : "defaults")
      << "): zeta_ROM=" << format_double(cfg.weights.zeta_ROM)
      << " phi_max=" << format_double(cfg.weights.phi_max)
      << " zeta_dot_max=" << format_double(cfg.weights.zeta_dot_max)
      << " tau_R_max=" << format_double(cfg.weights.tau_R_max) << '\n';
  write_metrics_csv_header(out);
  write_metrics_csv_row(out, row);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rider-ballbot braking: simulation, trajectory optimization and sweeps"};
  app.require_subcommand(1);

  CommonFlags sim_flags, opt_flags, sweep_flags, met_flags;
  std::string replay;
  auto* sim = app.add_subcommand("simulate", "closed-loop braking simulation from cruise");
  sim_flags.attach(sim);
  sim->add_option("--replay", replay, "trajectory CSV whose tau_R column drives the rider");

  auto* optc = app.add_subcommand("optimize", "minimum-effort braking for one condition");
  opt_flags.attach(optc);

  auto* sw = app.add_subcommand("sweep", "sensitivity sweep over the configured schemes");
  sweep_flags.attach(sw);

  std::string traj_path, label = "trajectory";
  double onset = 0.0;
  std::optional<double> zeta_rom, phi_max, zeta_dot_max, tau_r_max;
  auto* met = app.add_subcommand("metrics", "braking metrics of a trajectory CSV");
  met_flags.attach(met);
  met->add_option("trajectory", traj_path, "trajectory CSV")->required();
  met->add_option("--label", label, "scheme column of the emitted row");
  met->add_option("--onset", onset, "brake onset time [s]");
  met->add_option("--zeta-rom", zeta_rom, "torso range of motion weight [rad]");
  met->add_option("--phi-max", phi_max, "braking distance weight as ball angle [rad]");
  met->add_option("--zeta-dot-max", zeta_dot_max, "torso rate weight [rad/s]");
  met->add_option("--tau-r-max", tau_r_max, "rider torque weight [N m]");

  std::string preset_name = "default";
  std::string preset_out;
  auto* pre = app.add_subcommand("preset", "print a complete configuration preset");
  pre->add_option("name", preset_name, "preset name (default)");
  pre->add_option("--out", preset_out, "write to this file instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags.build(), replay, out, err);
    if (*optc) return cmd_optimize(opt_flags.build(), out, err);
    if (*sw) return cmd_sweep(sweep_flags.build(), out, err);
    if (*met) {
      RunConfig cfg = met_flags.build();
      if (zeta_rom) cfg.weights.zeta_ROM = *zeta_rom;
      if (phi_max) cfg.weights.phi_max = *phi_max;
      if (zeta_dot_max) cfg.weights.zeta_dot_max = *zeta_dot_max;
      if (tau_r_max) cfg.weights.tau_R_max = *tau_r_max;
      cfg.validate();
      const bool given = zeta_rom || phi_max || zeta_dot_max || tau_r_max;
      return cmd_metrics(cfg, traj_path, label, onset, given, out, err);
    }
    if (*pre) {
      if (preset_name != "default") {
        err << "unknown preset '" << preset_name << "' (available: default)\n";
        return kExitUsage;
      }
      std::ostringstream os;
      os << "# default rider: 60 kg, 1.8 m on a 30 kg chassis\n";
      write_config(os, RunConfig{});
      if (preset_out.empty()) {
        out << os.str();
      } else {
        write_text(preset_out, os.str());
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CsvSchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ridebot::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ridebot/trajopt.hpp"

namespace ridebot {

/// One row of a metrics table.
struct MetricsRow {
  std::string scheme;
  std::string param_name;  // nu, nu_P, nu_I or none
  double param_value = 0.0;
  BrakingMetrics metrics;
  std::string status;
};

inline constexpr const char* kMetricsCsvHeader =
    "scheme,param_name,param_value,J,torso_ROM_deg,max_tau_p,L_m,T_s,status";
inline constexpr const char* kSweepCsvHeader =
    "scheme,param_name,param_value,J,torso_ROM_deg,max_tau_p,L_m,T_s,status,"
    "iterations,kkt_residual,max_defect";

/// Metrics of an optimal solution, computed from its dense trajectory with
/// brake onset at t = 0, exactly as a reader of the emitted CSV would.
/// Throws NoStopDetected.
BrakingMetrics solution_metrics(const OptimalSolution& sol, const BrakingWeights& w,
                                const RiderBallbotParams& p);

struct SweepOptions {
  std::vector<std::string> schemes{"hics1", "hics2", "hacs1"};
  std::vector<double> sensitivities{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double v0 = 1.4;
  double phi_dot_max = kDefaultPhiDotMax;  // HICS-2 normalisation
  int segments = 50;
  BrakingBounds bounds;
  SolverOptions solver;
  unsigned workers = 0;  // 0: one per hardware thread
  // Extra cold starts from randomised guesses for a condition that fails to
  // converge from both the warm start and the default guess.
  int restarts = 1;
  std::uint64_t seed = 0;
};

struct SweepRow {
  MetricsRow row;
  int iterations = 0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  bool converged = false;
  std::optional<OptimalSolution> solution;  // absent when transcription failed
};

/// Builds the scheme for one sweep condition. `baseline` ignores the
/// sensitivity. Throws std::invalid_argument for other names.
ControlScheme sweep_scheme(const std::string& name, double sensitivity,
                           double phi_dot_max = kDefaultPhiDotMax);

/// Solves every (scheme, sensitivity) condition. Within a scheme the
/// sensitivities are solved in the given order, each warm-started from the
/// previous converged solution; schemes run concurrently. Rows come back in
/// scheme-major order whatever the worker count. Never throws for a single
/// failing condition: the row's status records it.
std::vector<SweepRow> run_sweep(const SweepOptions& opt, const RiderBallbotParams& p,
                                const Gains& g, const BrakingWeights& w);

void write_metrics_csv_header(std::ostream& os);
void write_metrics_csv_row(std::ostream& os, const MetricsRow& r);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

/// Sweep table reader; throws CsvSchemaError on a mismatching header or row.
std::vector<SweepRow> read_sweep_csv(std::istream& is);

/// Shortest decimal that round-trips, used in directory names (0.3, 1).
std::string short_number(double v);
/// `<scheme>_<sensitivity>`
std::string condition_directory(const MetricsRow& r);

}  // namespace ridebot

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <ridebot/al_solver.hpp>
#include <ridebot/control.hpp>
#include <ridebot/metrics.hpp>
#include <ridebot/model.hpp>
#include <ridebot/simulate.hpp>
#include <ridebot/sweep.hpp>
#include <ridebot/trajopt.hpp>

namespace ridebot::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command needs. Built from defaults, then a config file, then
/// command-line flags.
struct RunConfig {
  RiderBallbotParams model = default_rider();

  // Gains come from LQR synthesis unless `gains_source` is "manual".
  std::string gains_source = "lqr";
  Gains manual_gains;

  std::string scheme = "hacs1";
  double nu = 1.0;
  double nu_P = 0.5;
  double nu_I = 0.0;
  double nu_z = 1.0;
  double phi_dot_max = kDefaultPhiDotMax;

  SimOptions sim;
  double v0 = 1.4;
  // stiff: torso pulled into line with the chassis from t = 0; hold: the
  // cruise hold torque forever; passive: no rider torque
  std::string rider = "stiff";

  BrakingWeights weights;

  int segments = 50;
  BrakingBounds bounds;
  SolverOptions solver;
  std::vector<std::string> sweep_schemes{"hics1", "hics2", "hacs1"};
  std::vector<double> sweep_sensitivities{0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                          0.6, 0.7, 0.8, 0.9, 1.0};
  int restarts = 1;

  std::filesystem::path out = "ridebot_out";
  unsigned workers = 0;
  std::uint64_t seed = 0;

  /// Range and consistency checks; throws ConfigError naming the key.
  void validate() const;
  [[nodiscard]] ControlScheme control_scheme() const;
  [[nodiscard]] Gains gains() const;
  [[nodiscard]] SweepOptions sweep_options() const;
};

/// INI-style text: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Unknown sections or keys, malformed lines and unparsable values
/// throw ConfigError with the line number and the key.
void apply_config(RunConfig& cfg, std::istream& is);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Sets one `section.key` from a string, as the file parser does.
void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value);

/// Full effective configuration in the same format (re-readable).
void write_config(std::ostream& os, const RunConfig& cfg);

}  // namespace ridebot::cli

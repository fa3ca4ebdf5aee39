#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ridebot/model.hpp"

namespace ridebot {

/// Time-gridded closed-loop record: the unit exchanged between the
/// simulator, the optimizer and the metrics.
struct Trajectory {
  std::vector<double> t;
  std::vector<PlanarState> states;
  std::vector<InputTorques> inputs;
  std::vector<double> tau_p;      // sagittal interaction moment [N m]
  std::vector<double> phi_dot_c;  // command speed [rad/s]
  std::vector<std::uint8_t> saturated;

  [[nodiscard]] std::size_t size() const { return t.size(); }
  void reserve(std::size_t n);
  void push_back(double time, const PlanarState& s, const InputTorques& u,
                 double tau_p_value, double phi_dot_c_value, bool sat);

  /// Equal-length arrays, at least two knots, strictly increasing time.
  /// Throws std::invalid_argument otherwise.
  void validate() const;
};

class CsvSchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTrajectoryCsvHeader =
    "t,zeta,theta,phi,zeta_dot,theta_dot,phi_dot,tau_R,tau,tau_p,phi_dot_c,"
    "saturated";

/// Shortest-round-trip formatting is not required; 17 significant digits is.
std::string format_double(double v);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj);

/// Throws CsvSchemaError on a header or row that does not match the schema.
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace ridebot

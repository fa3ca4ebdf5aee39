#include "ridebot/trajectory.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ridebot {

void Trajectory::reserve(std::size_t n) {
  t.reserve(n);
  states.reserve(n);
  inputs.reserve(n);
  tau_p.reserve(n);
  phi_dot_c.reserve(n);
  saturated.reserve(n);
}

void Trajectory::push_back(double time, const PlanarState& s,
                           const InputTorques& u, double tau_p_value,
                           double phi_dot_c_value, bool sat) {
  t.push_back(time);
  states.push_back(s);
  inputs.push_back(u);
  tau_p.push_back(tau_p_value);
  phi_dot_c.push_back(phi_dot_c_value);
  saturated.push_back(sat ? 1 : 0);
}

void Trajectory::validate() const {
  const std::size_t n = t.size();
  if (states.size() != n || inputs.size() != n || tau_p.size() != n ||
      phi_dot_c.size() != n || saturated.size() != n) {
    throw std::invalid_argument("trajectory arrays have unequal lengths");
  }
  if (n < 2) throw std::invalid_argument("trajectory needs at least two knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t[i] > t[i - 1])) {
      throw std::invalid_argument("trajectory time grid is not strictly increasing");
    }
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kTrajectoryCsvHeader << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const PlanarState& s = traj.states[i];
    const double row[] = {traj.t[i],      s.zeta,       s.theta,
                          s.phi,          s.zeta_dot,   s.theta_dot,
                          s.phi_dot,      traj.inputs[i].tau_R,
                          traj.inputs[i].tau, traj.tau_p[i],
                          traj.phi_dot_c[i]};
    for (double v : row) os << format_double(v) << ',';
    os << static_cast<int>(traj.saturated[i]) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trajectory_csv(os, traj);
}

namespace {

double parse_field(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw CsvSchemaError("line " + std::to_string(line) + ": cannot parse '" +
                         field + "' as a number");
  }
  return v;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvSchemaError("empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryCsvHeader) {
    throw CsvSchemaError("unexpected header '" + line + "', expected '" +
                         kTrajectoryCsvHeader + "'");
  }
  Trajectory traj;
  std::size_t lineno = 1;
  std::vector<std::string> fields;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields.clear();
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 12) {
      throw CsvSchemaError("line " + std::to_string(lineno) + ": expected 12 columns, got " +
                           std::to_string(fields.size()));
    }
    double v[12];
    for (int k = 0; k < 12; ++k) v[k] = parse_field(fields[k], lineno);
    if (v[11] != 0.0 && v[11] != 1.0) {
      throw CsvSchemaError("line " + std::to_string(lineno) + ": saturated must be 0 or 1");
    }
    traj.push_back(v[0], PlanarState{v[1], v[2], v[3], v[4], v[5], v[6]},
                   InputTorques{v[7], v[8]}, v[9], v[10], v[11] != 0.0);
  }
  try {
    traj.validate();
  } catch (const std::invalid_argument& e) {
    throw CsvSchemaError(e.what());
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw CsvSchemaError("cannot open " + path.string());
  return read_trajectory_csv(is);
}

}  // namespace ridebot

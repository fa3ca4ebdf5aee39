#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

namespace ridebot::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) s += ", ";
    s += short_number(xs[i]);
  }
  return s;
}

std::string join_words(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) s += ", ";
    s += xs[i];
  }
  return s;
}

struct Entry {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string& full_key, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Entry number(const char* section, const char* key, double RunConfig::*outer) {
  return {section, key,
          [outer](RunConfig& c, const std::string& k, const std::string& v) {
            c.*outer = to_double(k, v);
          },
          [outer](const RunConfig& c) { return short_number(c.*outer); }};
}

template <typename Part>
Entry number(const char* section, const char* key, Part RunConfig::*part, double Part::*field) {
  return {section, key,
          [part, field](RunConfig& c, const std::string& k, const std::string& v) {
            (c.*part).*field = to_double(k, v);
          },
          [part, field](const RunConfig& c) { return short_number((c.*part).*field); }};
}

template <typename Part>
Entry integer(const char* section, const char* key, Part RunConfig::*part, int Part::*field) {
  return {section, key,
          [part, field](RunConfig& c, const std::string& k, const std::string& v) {
            (c.*part).*field = static_cast<int>(to_integer(k, v));
          },
          [part, field](const RunConfig& c) { return std::to_string((c.*part).*field); }};
}

Entry word(const char* section, const char* key, std::string RunConfig::*field) {
  return {section, key,
          [field](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

const std::vector<Entry>& registry() {
  using C = RunConfig;
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(number("model", "m_s", &C::model, &RiderBallbotParams::m_s));
    e.push_back(number("model", "r_s", &C::model, &RiderBallbotParams::r_s));
    e.push_back(number("model", "I_s", &C::model, &RiderBallbotParams::I_s));
    e.push_back(number("model", "m_c", &C::model, &RiderBallbotParams::m_c));
    e.push_back(number("model", "l_c", &C::model, &RiderBallbotParams::l_c));
    e.push_back(number("model", "I_c", &C::model, &RiderBallbotParams::I_c));
    e.push_back(number("model", "m_r", &C::model, &RiderBallbotParams::m_r));
    e.push_back(number("model", "l_r", &C::model, &RiderBallbotParams::l_r));
    e.push_back(number("model", "I_r", &C::model, &RiderBallbotParams::I_r));
    e.push_back(number("model", "h_s", &C::model, &RiderBallbotParams::h_s));
    e.push_back(number("model", "I_z", &C::model, &RiderBallbotParams::I_z));
    e.push_back(number("model", "b_phi", &C::model, &RiderBallbotParams::b_phi));
    e.push_back(number("model", "g", &C::model, &RiderBallbotParams::g));

    e.push_back(word("gains", "source", &C::gains_source));
    e.push_back(number("gains", "k1", &C::manual_gains, &Gains::k1));
    e.push_back(number("gains", "k2", &C::manual_gains, &Gains::k2));
    e.push_back(number("gains", "k3", &C::manual_gains, &Gains::k3));
    e.push_back(number("gains", "k1z", &C::manual_gains, &Gains::k1z));
    e.push_back(number("gains", "k2z", &C::manual_gains, &Gains::k2z));

    e.push_back(word("scheme", "name", &C::scheme));
    e.push_back(number("scheme", "nu", &C::nu));
    e.push_back(number("scheme", "nu_P", &C::nu_P));
    e.push_back(number("scheme", "nu_I", &C::nu_I));
    e.push_back(number("scheme", "nu_z", &C::nu_z));
    e.push_back(number("scheme", "phi_dot_max", &C::phi_dot_max));

    e.push_back(number("simulation", "dt", &C::sim, &SimOptions::dt));
    e.push_back(number("simulation", "t_end", &C::sim, &SimOptions::t_end));
    e.push_back(number("simulation", "theta_limit", &C::sim, &SimOptions::theta_limit));
    e.push_back(number("simulation", "tau_max", &C::sim, &SimOptions::tau_max));
    e.push_back(number("simulation", "v0", &C::v0));
    e.push_back(word("simulation", "rider", &C::rider));

    e.push_back(number("weights", "zeta_ROM", &C::weights, &BrakingWeights::zeta_ROM));
    e.push_back(number("weights", "phi_max", &C::weights, &BrakingWeights::phi_max));
    e.push_back(number("weights", "zeta_dot_max", &C::weights, &BrakingWeights::zeta_dot_max));
    e.push_back(number("weights", "tau_R_max", &C::weights, &BrakingWeights::tau_R_max));

    e.push_back({"optimization", "segments",
                 [](C& c, const std::string& k, const std::string& v) {
                   c.segments = static_cast<int>(to_integer(k, v));
                 },
                 [](const C& c) { return std::to_string(c.segments); }});
    e.push_back(number("optimization", "zeta_max", &C::bounds, &BrakingBounds::zeta_max));
    e.push_back(number("optimization", "theta_max", &C::bounds, &BrakingBounds::theta_max));
    e.push_back(number("optimization", "tau_R_max", &C::bounds, &BrakingBounds::tau_R_max));
    e.push_back(number("optimization", "tau_max", &C::bounds, &BrakingBounds::tau_max));
    e.push_back(number("optimization", "t_F_min", &C::bounds, &BrakingBounds::t_F_min));
    e.push_back(number("optimization", "t_F_max", &C::bounds, &BrakingBounds::t_F_max));
    e.push_back(number("optimization", "kkt_tolerance", &C::solver,
                       &SolverOptions::kkt_tolerance));
    e.push_back(number("optimization", "floor_kkt_tolerance", &C::solver,
                       &SolverOptions::floor_kkt_tolerance));
    e.push_back(number("optimization", "feasibility_tolerance", &C::solver,
                       &SolverOptions::feasibility_tolerance));
    e.push_back(integer("optimization", "max_outer_iterations", &C::solver,
                        &SolverOptions::max_outer_iterations));
    e.push_back(integer("optimization", "max_inner_iterations", &C::solver,
                        &SolverOptions::max_inner_iterations));
    e.push_back(integer("optimization", "max_total_inner_iterations", &C::solver,
                        &SolverOptions::max_total_inner_iterations));
    e.push_back({"optimization", "restarts",
                 [](C& c, const std::string& k, const std::string& v) {
                   c.restarts = static_cast<int>(to_integer(k, v));
                 },
                 [](const C& c) { return std::to_string(c.restarts); }});
    e.push_back({"optimization", "sweep_schemes",
                 [](C& c, const std::string&, const std::string& v) {
                   c.sweep_schemes = split_list(v);
                 },
                 [](const C& c) { return join_words(c.sweep_schemes); }});
    e.push_back({"optimization", "sweep_sensitivities",
                 [](C& c, const std::string& k, const std::string& v) {
                   c.sweep_sensitivities.clear();
                   for (const auto& item : split_list(v)) {
                     c.sweep_sensitivities.push_back(to_double(k, item));
                   }
                 },
                 [](const C& c) { return join_numbers(c.sweep_sensitivities); }});

    e.push_back({"output", "directory",
                 [](C& c, const std::string&, const std::string& v) { c.out = v; },
                 [](const C& c) { return c.out.string(); }});
    e.push_back({"output", "workers",
                 [](C& c, const std::string& k, const std::string& v) {
                   const long long w = to_integer(k, v);
                   if (w < 0) throw ConfigError("key '" + k + "': must be >= 0");
                   c.workers = static_cast<unsigned>(w);
                 },
                 [](const C& c) { return std::to_string(c.workers); }});
    e.push_back({"output", "seed",
                 [](C& c, const std::string& k, const std::string& v) {
                   const long long s = to_integer(k, v);
                   if (s < 0) throw ConfigError("key '" + k + "': must be >= 0");
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const C& c) { return std::to_string(c.seed); }});
    return e;
  }();
  return entries;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value) {
  const std::string full = section + "." + key;
  bool section_known = false;
  for (const Entry& e : registry()) {
    if (section != e.section) continue;
    section_known = true;
    if (key == e.key) {
      e.set(cfg, full, value);
      return;
    }
  }
  if (!section_known) throw ConfigError("unknown section '" + section + "'");
  throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

void apply_config(RunConfig& cfg, std::istream& is) {
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(registry().begin(), registry().end(),
                                     [&](const Entry& e) { return section == e.section; });
      if (!known) throw ConfigError(where + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of a [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    try {
      set_config_value(cfg, section, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  apply_config(cfg, is);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  const char* current = "";
  for (const Entry& e : registry()) {
    if (std::string(current) != e.section) {
      if (*current != '\0') os << '\n';
      current = e.section;
      os << '[' << current << "]\n";
    }
    os << e.key << " = " << e.get(cfg) << '\n';
  }
}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  if (gains_source != "lqr" && gains_source != "manual") {
    throw ConfigError("key 'gains.source': expected lqr or manual, got '" + gains_source + "'");
  }
  const std::pair<const char*, double> sensitivities[] = {
      {"nu", nu}, {"nu_P", nu_P}, {"nu_I", nu_I}, {"nu_z", nu_z}};
  for (const auto& [key, value] : sensitivities) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ConfigError(std::string("key 'scheme.") + key + "': must lie in [0, 1]");
    }
  }
  try {
    control_scheme().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[scheme] ") + e.what());
  }
  if (!(sim.dt > 0.0 && sim.dt <= 0.01)) throw ConfigError("key 'simulation.dt': need 0 < dt <= 0.01");
  if (!(sim.t_end > 0.0)) throw ConfigError("key 'simulation.t_end': must be positive");
  if (!(sim.theta_limit > 0.0)) throw ConfigError("key 'simulation.theta_limit': must be positive");
  if (!(sim.tau_max > 0.0)) throw ConfigError("key 'simulation.tau_max': must be positive");
  if (!(v0 >= 0.0)) throw ConfigError("key 'simulation.v0': must be >= 0");
  if (rider != "stiff" && rider != "passive" && rider != "hold") {
    throw ConfigError("key 'simulation.rider': expected stiff, passive or hold, got '" + rider +
                      "'");
  }
  try {
    weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[weights] ") + e.what());
  }
  if (segments < 10) throw ConfigError("key 'optimization.segments': need at least 10");
  if (restarts < 0) throw ConfigError("key 'optimization.restarts': must be >= 0");
  if (sweep_schemes.empty()) throw ConfigError("key 'optimization.sweep_schemes': empty list");
  for (const auto& s : sweep_schemes) {
    try {
      (void)sweep_scheme(s, 0.0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'optimization.sweep_schemes': ") + e.what());
    }
  }
  if (sweep_sensitivities.empty()) {
    throw ConfigError("key 'optimization.sweep_sensitivities': empty list");
  }
  for (double v : sweep_sensitivities) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("key 'optimization.sweep_sensitivities': values must lie in [0, 1]");
    }
  }
}

ControlScheme RunConfig::control_scheme() const {
  ControlScheme s;
  try {
    s = ControlScheme::from_name(scheme, nu, nu_P, nu_I);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("key 'scheme.name': ") + e.what());
  }
  if (auto* h2 = std::get_if<scheme::Hics2>(&s.law)) h2->phi_dot_max = phi_dot_max;
  s.nu_z = nu_z;
  return s;
}

Gains RunConfig::gains() const {
  return gains_source == "manual" ? manual_gains : synthesize_gains(model);
}

SweepOptions RunConfig::sweep_options() const {
  SweepOptions o;
  o.schemes = sweep_schemes;
  o.sensitivities = sweep_sensitivities;
  o.v0 = v0;
  o.phi_dot_max = phi_dot_max;
  o.segments = segments;
  o.bounds = bounds;
  o.solver = solver;
  o.workers = workers;
  o.restarts = restarts;
  o.seed = seed;
  return o;
}

}  // namespace ridebot::cli

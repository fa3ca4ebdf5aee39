#include "ridebot/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ridebot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

bool better(const OptimalSolution& a, const OptimalSolution& b) {
  if (a.converged != b.converged) return a.converged;
  if (a.converged) return a.J_star < b.J_star;
  return a.kkt_residual + a.max_defect < b.kkt_residual + b.max_defect;
}

// Solves one condition: warm start first, then the default guess, then
// randomised final-time guesses.
SweepRow solve_condition(const std::string& name, double sensitivity, const SweepOptions& opt,
                         const RiderBallbotParams& p, const Gains& g, const BrakingWeights& w,
                         const OptimalSolution* warm, std::uint64_t stream) {
  SweepRow out;
  BrakingProblem prob;
  prob.scheme = sweep_scheme(name, sensitivity, opt.phi_dot_max);
  prob.v0 = opt.v0;
  prob.weights = w;
  prob.bounds = opt.bounds;
  prob.segments = opt.segments;
  out.row.scheme = prob.scheme.name();
  out.row.param_name = prob.scheme.sensitivity_name();
  out.row.param_value = prob.scheme.sensitivity().value_or(0.0);
  out.row.metrics = {kNaN, kNaN, kNaN, kNaN, kNaN};
  out.kkt_residual = kNaN;
  out.max_defect = kNaN;

  NLPInstance inst;
  try {
    inst = transcribe(prob, p, g);
  } catch (const std::exception& e) {
    out.row.status = csv_safe(std::string("failed: ") + e.what());
    return out;
  }

  std::optional<OptimalSolution> best;
  int iterations = 0;
  auto attempt = [&](const std::optional<Eigen::VectorXd>& x0,
                     const std::optional<DualWarmStart>& y0) {
    OptimalSolution s = solve_nlp(inst, x0, opt.solver, y0);
    iterations += s.iterations;
    if (!best || better(s, *best)) best = std::move(s);
    return best->converged;
  };

  bool done = false;
  if (warm != nullptr && warm->x.size() == inst.layout.size()) {
    done = attempt(warm->x, std::nullopt);
  }
  if (!done) done = attempt(std::nullopt, std::nullopt);
  std::mt19937_64 rng(opt.seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  std::uniform_real_distribution<double> t_guess(0.5, 3.0);
  for (int r = 0; !done && r < opt.restarts; ++r) {
    done = attempt(inst.initial_guess(t_guess(rng)), std::nullopt);
  }

  out.iterations = iterations;
  out.kkt_residual = best->kkt_residual;
  out.max_defect = best->max_defect;
  out.converged = best->converged;
  out.row.status = best->converged ? "converged" : "not_converged";
  try {
    out.row.metrics = solution_metrics(*best, w, p);
  } catch (const NoStopDetected&) {
    if (best->converged) out.row.status = "no_stop";
  }
  out.solution = std::move(best);
  return out;
}

}  // namespace

BrakingMetrics solution_metrics(const OptimalSolution& sol, const BrakingWeights& w,
                                const RiderBallbotParams& p) {
  return compute_metrics(sol.trajectory, w, p, StopCriterion{});
}

ControlScheme sweep_scheme(const std::string& name, double sensitivity, double phi_dot_max) {
  if (name == "baseline") return ControlScheme::baseline();
  if (name == "hics1") return ControlScheme::hics1(sensitivity);
  if (name == "hics2") return ControlScheme::hics2(sensitivity, phi_dot_max);
  if (name == "hacs1") return ControlScheme::hacs1(sensitivity);
  throw std::invalid_argument("scheme '" + name +
                              "' cannot be swept (use baseline, hics1, hics2 or hacs1)");
}

std::vector<SweepRow> run_sweep(const SweepOptions& opt, const RiderBallbotParams& p,
                                const Gains& g, const BrakingWeights& w) {
  for (const auto& s : opt.schemes) (void)sweep_scheme(s, 0.0);
  for (double v : opt.sensitivities) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("sensitivities must lie in [0, 1]");
  }

  const std::size_t n_s = opt.schemes.size();
  std::vector<std::vector<SweepRow>> chains(n_s);
  auto run_chain = [&](std::size_t i) {
    const std::string& name = opt.schemes[i];
    const std::vector<double> values =
        name == "baseline" ? std::vector<double>{0.0} : opt.sensitivities;
    const OptimalSolution* warm = nullptr;
    for (std::size_t j = 0; j < values.size(); ++j) {
      chains[i].push_back(
          solve_condition(name, values[j], opt, p, g, w, warm, i * 1000 + j));
      const SweepRow& last = chains[i].back();
      if (last.converged) warm = &*last.solution;
    }
  };

  unsigned workers = opt.workers != 0 ? opt.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(n_s, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n_s; ++i) run_chain(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_s; i = next++) run_chain(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<SweepRow> rows;
  for (auto& c : chains) {
    for (auto& r : c) rows.push_back(std::move(r));
  }
  return rows;
}

void write_metrics_csv_header(std::ostream& os) { os << kMetricsCsvHeader << '\n'; }

namespace {

void write_metrics_fields(std::ostream& os, const MetricsRow& r) {
  os << r.scheme << ',' << r.param_name << ',' << format_double(r.param_value) << ','
     << format_double(r.metrics.J) << ',' << format_double(r.metrics.torso_ROM_deg) << ','
     << format_double(r.metrics.max_tau_p) << ',' << format_double(r.metrics.L) << ','
     << format_double(r.metrics.T) << ',' << csv_safe(r.status);
}

double parse_number(const std::string& f, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    throw CsvSchemaError("line " + std::to_string(line) + ": cannot parse '" + f +
                         "' as a number");
  }
  return v;
}

}  // namespace

void write_metrics_csv_row(std::ostream& os, const MetricsRow& r) {
  write_metrics_fields(os, r);
  os << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    write_metrics_fields(os, r.row);
    os << ',' << r.iterations << ',' << format_double(r.kkt_residual) << ','
       << format_double(r.max_defect) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_sweep_csv(os, rows);
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvSchemaError("empty sweep file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw CsvSchemaError("unexpected header '" + line + "'");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) {
      throw CsvSchemaError("line " + std::to_string(lineno) + ": expected 12 columns");
    }
    SweepRow r;
    r.row.scheme = f[0];
    r.row.param_name = f[1];
    r.row.param_value = parse_number(f[2], lineno);
    r.row.metrics = {parse_number(f[3], lineno), parse_number(f[4], lineno),
                     parse_number(f[5], lineno), parse_number(f[6], lineno),
                     parse_number(f[7], lineno)};
    r.row.status = f[8];
    r.iterations = static_cast<int>(parse_number(f[9], lineno));
    r.kkt_residual = parse_number(f[10], lineno);
    r.max_defect = parse_number(f[11], lineno);
    r.converged = r.row.status == "converged";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string short_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : format_double(v);
}

std::string condition_directory(const MetricsRow& r) {
  return r.scheme + "_" + short_number(r.param_value);
}

}  // namespace ridebot

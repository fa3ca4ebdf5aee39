#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace ridebot::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void render_panel(std::ostringstream& os, const Panel& panel, double x0, double y0, double w,
                  double h) {
  const double left = 70.0, right = 150.0, top = 28.0, bottom = 42.0;
  const double px = x0 + left, py = y0 + top;
  const double pw = w - left - right, ph = h - top - bottom;

  Range rx, ry;
  for (const Series& s : panel.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        rx.add(s.x[i]);
        ry.add(s.y[i]);
      }
    }
  }
  rx.settle();
  ry.settle();
  const double ystep = nice_step(ry.hi - ry.lo, 5);
  ry.lo = std::floor(ry.lo / ystep) * ystep;
  ry.hi = std::ceil(ry.hi / ystep) * ystep;
  const double xstep = nice_step(rx.hi - rx.lo, 6);

  auto sx = [&](double x) { return px + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto sy = [&](double y) { return py + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };

  os << "<g class=\"panel\">\n";
  os << "<text x=\"" << num(px + pw / 2) << "\" y=\"" << num(y0 + 18)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(panel.title) << "</text>\n";
  os << "<rect x=\"" << num(px) << "\" y=\"" << num(py) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double t = std::ceil(ry.lo / ystep) * ystep; t <= ry.hi + 1e-9 * ystep; t += ystep) {
    os << "<line x1=\"" << num(px) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(px + pw)
       << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(px - 6) << "\" y=\"" << num(sy(t) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  for (double t = std::ceil(rx.lo / xstep) * xstep; t <= rx.hi + 1e-9 * xstep; t += xstep) {
    os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(py + ph) << "\" x2=\"" << num(sx(t))
       << "\" y2=\"" << num(py + ph + 4) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(py + ph + 17)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num(px + pw / 2) << "\" y=\"" << num(py + ph + 34)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.xlabel) << "</text>\n";
  os << "<text transform=\"translate(" << num(x0 + 16) << "," << num(py + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.ylabel)
     << "</text>\n";

  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const Series& s = panel.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<g class=\"series\" data-name=\"" << escape(s.name) << "\">\n";
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L" : " M") + num(sx(s.x[i])) + " " + num(sy(s.y[i]));
      pen_down = true;
    }
    if (!path.empty()) {
      os << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.6\"/>\n";
    }
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        const bool hollow = i < s.hollow.size() && s.hollow[i];
        os << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i]))
           << "\" r=\"3.5\" stroke=\"" << color << "\" fill=\"" << (hollow ? "white" : color)
           << "\"/>\n";
      }
    }
    const double ly = py + 12 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(px + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(px + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(px + pw + 38) << "\" y=\"" << num(ly + 4)
       << "\" font-size=\"12\">" << escape(s.name) << "</text>\n";
    os << "</g>\n";
  }
  os << "</g>\n";
}

}  // namespace

std::string render_svg(const std::string& title, const std::vector<Panel>& panels,
                       double width, double panel_height) {
  const double head = 34.0;
  const double height = head + panel_height * static_cast<double>(panels.size());
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height)
     << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">"
     << escape(title) << "</text>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(os, panels[i], 0.0, head + panel_height * static_cast<double>(i), width,
                 panel_height);
  }
  os << "</svg>\n";
  return os.str();
}

std::string sweep_plot(const std::vector<SweepRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, Series> by_scheme;
  for (const SweepRow& r : rows) {
    auto [it, inserted] = by_scheme.try_emplace(r.row.scheme);
    if (inserted) {
      order.push_back(r.row.scheme);
      it->second.name = r.row.scheme + " (" + r.row.param_name + ")";
      it->second.markers = true;
    }
    it->second.x.push_back(r.row.param_value);
    it->second.y.push_back(r.row.metrics.J);
    it->second.hollow.push_back(!r.converged);
  }
  Panel p{"Braking effort against sensitivity", "sensitivity", "J", {}};
  for (const auto& name : order) p.series.push_back(by_scheme[name]);
  return render_svg("Sensitivity sweep (hollow: not converged)", {p}, 760.0, 360.0);
}

std::string trajectory_panels(const std::string& title, const Trajectory& traj,
                              const RiderBallbotParams& p) {
  const double deg = 180.0 / std::numbers::pi;
  auto series = [&](const char* name) {
    Series s;
    s.name = name;
    s.x = traj.t;
    return s;
  };
  Series theta = series("tilt theta"), zeta = series("lean zeta");
  Series tau = series("tau"), tau_R = series("tau_R"), tau_p = series("tau_p");
  Series x = series("x [m]"), v = series("v [m/s]"), vc = series("v_c [m/s]");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const PlanarState& s = traj.states[i];
    theta.y.push_back(s.theta * deg);
    zeta.y.push_back(s.zeta * deg);
    tau.y.push_back(traj.inputs[i].tau);
    tau_R.y.push_back(traj.inputs[i].tau_R);
    tau_p.y.push_back(traj.tau_p[i]);
    x.y.push_back(p.r_s * (s.phi - traj.states.front().phi));
    v.y.push_back(p.r_s * s.phi_dot);
    vc.y.push_back(p.r_s * traj.phi_dot_c[i]);
  }
  return render_svg(title,
                    {Panel{"Tilt and lean", "t [s]", "angle [deg]", {theta, zeta}},
                     Panel{"Torques", "t [s]", "torque [N m]", {tau, tau_R, tau_p}},
                     Panel{"Displacement and speed", "t [s]", "x [m], v [m/s]", {x, v, vc}}});
}

}  // namespace ridebot::cli

#pragma once

#include <string>
#include <vector>

#include <ridebot/sweep.hpp>
#include <ridebot/trajectory.hpp>

namespace ridebot::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
  std::vector<bool> hollow;  // per point; hollow markers flag failed points
};

struct Panel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
};

/// Panels stacked vertically sharing the figure width. Each series becomes
/// one `<g class="series">` element. Non-finite points break the line.
std::string render_svg(const std::string& title, const std::vector<Panel>& panels,
                       double width = 760.0, double panel_height = 250.0);

/// Braking effort against sensitivity, one series per scheme; hollow
/// markers for conditions that did not converge.
std::string sweep_plot(const std::vector<SweepRow>& rows);

/// Tilt/lean, torques, and displacement/speed/command-speed panels.
std::string trajectory_panels(const std::string& title, const Trajectory& traj,
                              const RiderBallbotParams& p);

}  // namespace ridebot::cli

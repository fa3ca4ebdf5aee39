#include "ridebot/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ridebot {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("parameter '") + name +
                                "' must be finite and strictly positive");
  }
}

}  // namespace

void RiderBallbotParams::validate() const {
  require_positive(m_s, "m_s");
  require_positive(r_s, "r_s");
  require_positive(I_s, "I_s");
  require_positive(m_c, "m_c");
  require_positive(l_c, "l_c");
  require_positive(I_c, "I_c");
  require_positive(m_r, "m_r");
  require_positive(l_r, "l_r");
  require_positive(I_r, "I_r");
  require_positive(h_s, "h_s");
  require_positive(I_z, "I_z");
  require_positive(g, "g");
  if (!(b_phi >= 0.0) || !std::isfinite(b_phi)) {
    throw std::invalid_argument("parameter 'b_phi' must be finite and >= 0");
  }
}

RiderBallbotParams default_rider() {
  constexpr double kRiderMass = 60.0;
  constexpr double kTorsoFraction = 0.678;
  constexpr double kChassisMass = 30.0;

  RiderBallbotParams p;
  p.m_s = 4.0;
  p.r_s = 2.0 / 17.6;
  p.I_s = 2.0 / 3.0 * p.m_s * p.r_s * p.r_s;  // thin shell
  p.m_r = kTorsoFraction * kRiderMass;
  p.m_c = kChassisMass + (1.0 - kTorsoFraction) * kRiderMass;
  p.l_c = 0.3;
  p.l_r = 0.3;
  p.h_s = 0.45;
  // slender rods spanning twice the COM offset
  p.I_c = p.m_c * (2.0 * p.l_c) * (2.0 * p.l_c) / 12.0;
  p.I_r = p.m_r * (2.0 * p.l_r) * (2.0 * p.l_r) / 12.0;
  p.I_z = 3.0;
  p.b_phi = 0.0;
  p.g = 9.81;
  return p;
}

}  // namespace ridebot

#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

namespace ridebot {

/// Forward-mode scalar with up to 32 directional derivatives held inline.
using AdDerivatives = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 32, 1>;
using AdScalar = Eigen::AutoDiffScalar<AdDerivatives>;

/// Seeds `value` as independent variable `index` of `count`.
inline AdScalar ad_variable(double value, int count, int index) {
  return AdScalar(value, count, index);
}

inline AdScalar ad_constant(double value, int count) {
  return AdScalar(value, AdDerivatives::Zero(count));
}

/// Constant carrying the same derivative length as `like`. AutoDiffScalar
/// asserts when operands have derivative vectors of different sizes.
template <typename S>
S constant_like(double value, const S& /*like*/) {
  return S(value);
}

inline AdScalar constant_like(double value, const AdScalar& like) {
  return AdScalar(value, AdDerivatives::Zero(like.derivatives().size()));
}

}  // namespace ridebot

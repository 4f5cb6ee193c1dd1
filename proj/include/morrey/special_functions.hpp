#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "morrey/error.hpp"

namespace morrey {

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "incomplete_beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, "incomplete_beta needs x in [0,1]");
  return boost::math::ibeta(a, b, x);
}

/// Volume of the unit ball and surface area of the unit sphere in R^n.
struct VolumeConstants {
  int n;
  double unit_ball_volume;
  double unit_sphere_area;

  explicit VolumeConstants(int dim)
      : n(dim),
        unit_ball_volume(std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0)),
        unit_sphere_area(dim * unit_ball_volume) {
    if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  }

  double ball_volume(double r) const { return unit_ball_volume * std::pow(r, n); }
};

/// Fraction of the sphere {|x| = t} lying inside the open ball B(a, r), |a| = d.
inline double cap_fraction(double t, double d, double r, int n) {
  if (t + d <= r) return 1.0;
  if (std::abs(t - d) >= r) return 0.0;
  if (n == 1) {
    // The "sphere" is {-t, +t}; the ball is the interval (d - r, d + r).
    const int inside = static_cast<int>(std::abs(t - d) < r) + static_cast<int>(std::abs(-t - d) < r);
    return 0.5 * inside;
  }
  // Cap half-angle theta seen from the origin, measured from the direction of a.
  // 1 -+ cos(theta) in factored form: no cancellation when r << d.
  const double inv = 1.0 / (2.0 * t * d);
  const double one_minus_cos = std::max(0.0, (r - (t - d)) * (r + (t - d)) * inv);
  const double one_plus_cos = std::max(0.0, ((t + d) - r) * ((t + d) + r) * inv);
  const bool acute = one_minus_cos <= one_plus_cos;
  if (n == 2) {
    const double theta = acute ? 2.0 * std::asin(std::min(1.0, std::sqrt(0.5 * one_minus_cos)))
                               : std::numbers::pi - 2.0 * std::asin(std::min(1.0, std::sqrt(0.5 * one_plus_cos)));
    return theta / std::numbers::pi;
  }
  if (n == 3) return acute ? 0.5 * one_minus_cos : 1.0 - 0.5 * one_plus_cos;
  const double sin2 = std::min(1.0, one_minus_cos * one_plus_cos);
  const double half_cap = 0.5 * incomplete_beta(sin2, 0.5 * (n - 1), 0.5);
  return acute ? half_cap : 1.0 - half_cap;
}

}  // namespace morrey

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "morrey/core_model.hpp"
#include "morrey/error.hpp"
#include "morrey/parallel.hpp"
#include "morrey/special_functions.hpp"

namespace morrey {

/// Ball B(a, r) with |a| = d. Radial symmetry makes the direction of a irrelevant.
struct Ball {
  double d = 0.0;
  double r = 1.0;
};

struct IntegrationSettings {
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t rng_seed = 20200101;

  void validate() const {
    if (!(rel_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be > 0");
    if (max_subdivisions < 1) throw Error(ErrorCode::InvalidArgument, "max_subdivisions must be >= 1");
    if (mc_samples < 1) throw Error(ErrorCode::InvalidArgument, "mc_samples must be >= 1");
  }
};

/// Value of a ball integral. `infinite` marks a non-integrable singularity;
/// `tolerance_met` is false when the subdivision budget ran out first.
struct IntegralValue {
  double value = 0.0;
  bool infinite = false;
  bool tolerance_met = true;
  double abs_error = 0.0;

  static IntegralValue make_infinite() { return IntegralValue{kInf, true, true, 0.0}; }
};

namespace detail {

// \int_a^b t^{e-1} dt, +inf when a == 0 and e <= 0.
inline double power_antiderivative_span(double e, double a, double b) {
  if (!(b > a)) return 0.0;
  if (a == 0.0) return e > 0.0 ? std::pow(b, e) / e : kInf;
  if (std::isinf(b)) return e < 0.0 ? -std::pow(a, e) / e : kInf;
  const double log_ratio = std::log(b / a);
  if (e == 0.0) return log_ratio;
  return std::pow(a, e) * std::expm1(e * log_ratio) / e;
}

// Sum over pieces of |coef|^p \int_{[lo,hi) \cap [a,b)} t^{alpha p + shift - 1} dt.
inline double closed_form_radial(const RadialFunction& f, double p, double shift, double a, double b) {
  double total = 0.0;
  for (const Piece& piece : f.pieces()) {
    const double lo = std::max(piece.lo, a);
    const double hi = std::min(piece.hi, b);
    if (!(hi > lo)) continue;
    total += std::pow(std::abs(piece.coef), p) * power_antiderivative_span(piece.alpha * p + shift, lo, hi);
  }
  return total;
}

// QUADPACK 15-point Kronrod rule with embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct RuleResult {
  double value;
  double error;
};

template <typename Fn>
RuleResult gauss_kronrod_15(const Fn& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = fn(center);
  double kronrod = f_center * kKronrodWeights[7];
  double gauss = f_center * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 7> f_left{};
  std::array<double, 7> f_right{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    f_left[j] = fn(center - dx);
    f_right[j] = fn(center + dx);
    kronrod += kKronrodWeights[j] * (f_left[j] + f_right[j]);
    abs_sum += kKronrodWeights[j] * (std::abs(f_left[j]) + std::abs(f_right[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f_left[j] + f_right[j]);
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(f_center - mean);
  for (int j = 0; j < 7; ++j)
    asc += kKronrodWeights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));
  asc *= std::abs(half);
  double error = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && error != 0.0) error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
  const double abs_value = abs_sum * std::abs(half);
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_value;
  if (abs_value > std::numeric_limits<double>::min() / roundoff) error = std::max(error, roundoff);
  return {kronrod * half, error};
}

// One term weight * t^beta * cap(t) on [a, b], integrated in u via the smoothing
// map t = a + (b - a)(3u^2 - 2u^3), which flattens sqrt-type endpoint behaviour.
struct CapPanel {
  double a;
  double b;
  double weight;
  double beta;
};

struct PanelSegment {
  std::size_t panel;
  double u0;
  double u1;
  double value;
  double error;
  bool operator<(const PanelSegment& other) const { return error < other.error; }
};

}  // namespace detail

/// |B(0,1)| and the sphere area in R^n.
inline VolumeConstants volume_constants(int n) { return VolumeConstants(n); }

/// \int_{B(0,r)} |f|^p dx in closed form; Infinite when a piece starting at 0
/// has alpha p + n <= 0.
inline IntegralValue integrate_abs_pow_centered(const RadialFunction& f, double p, double r, int n) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be > 0");
  const VolumeConstants vc(n);
  const double radial = detail::closed_form_radial(f, p, static_cast<double>(n), 0.0, r);
  if (std::isinf(radial)) return IntegralValue::make_infinite();
  return IntegralValue{vc.unit_sphere_area * radial, false, true, 0.0};
}

/// \int_{B(a,r)} |f|^p dx for |a| = ball.d. The region |x| < r - d is done in
/// closed form; the cap region |r - d| <= |x| <= d + r uses adaptive
/// Gauss-Kronrod on the cap-fraction-weighted radial integrand.
inline IntegralValue integrate_abs_pow_ball(const RadialFunction& f, double p, const Ball& ball, int n,
                                            const IntegrationSettings& settings) {
  if (!(ball.r > 0.0) || !(ball.d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ball needs r > 0, d >= 0");
  if (f.is_zero()) return {};
  const double d = ball.d;
  const double r = ball.r;

  if (n == 1) {
    // Interval (d - r, d + r): the positive half-line contributes t in
    // (max(0, d - r), d + r), the negative one t in (0, r - d).
    const double right = detail::closed_form_radial(f, p, 1.0, std::max(0.0, d - r), d + r);
    const double left = r > d ? detail::closed_form_radial(f, p, 1.0, 0.0, r - d) : 0.0;
    if (std::isinf(right) || std::isinf(left)) return IntegralValue::make_infinite();
    return IntegralValue{right + left, false, true, 0.0};
  }

  const VolumeConstants vc(n);
  const double shift = static_cast<double>(n);
  double total = 0.0;
  if (r > d) {
    const double inner = detail::closed_form_radial(f, p, shift, 0.0, r - d);
    if (std::isinf(inner)) return IntegralValue::make_infinite();
    total += vc.unit_sphere_area * inner;
  }
  const double cap_lo = std::abs(r - d);
  const double cap_hi = d + r;
  if (!(cap_hi > cap_lo)) return IntegralValue{total, false, true, 0.0};

  auto cap = [&](double t) { return cap_fraction(t, d, r, n); };

  std::vector<detail::CapPanel> panels;
  double tail = 0.0;  // closed-form contribution below the graded panels when cap_lo == 0
  for (const Piece& piece : f.pieces()) {
    const double a = std::max(piece.lo, cap_lo);
    const double b = std::min(piece.hi, cap_hi);
    if (!(b > a)) continue;
    const double weight = vc.unit_sphere_area * std::pow(std::abs(piece.coef), p);
    const double e = piece.alpha * p + shift;
    const double beta = e - 1.0;
    if (a > 0.0) {
      panels.push_back({a, b, weight, beta});
      continue;
    }
    // Origin on the sphere of the ball (d == r): grade panels geometrically
    // toward t = 0 and close with the closed-form tail times the cap value.
    if (e <= 0.0) return IntegralValue::make_infinite();
    double hi = b;
    const double floor = settings.rel_tol * cap_hi;
    while (hi > floor) {
      panels.push_back({0.5 * hi, hi, weight, beta});
      hi *= 0.5;
    }
    tail += weight * cap(0.5 * hi) * std::pow(hi, e) / e;
  }
  total += tail;

  std::priority_queue<detail::PanelSegment> queue;
  double sum = 0.0;
  double err = 0.0;
  auto integrate_segment = [&](std::size_t index, double u0, double u1) {
    const detail::CapPanel& panel = panels[index];
    const double width = panel.b - panel.a;
    auto integrand = [&](double u) {
      const double t = panel.a + width * u * u * (3.0 - 2.0 * u);
      const double jac = 6.0 * width * u * (1.0 - u);
      if (jac == 0.0 || t <= 0.0) return 0.0;
      return panel.weight * std::pow(t, panel.beta) * cap(t) * jac;
    };
    const auto rule = detail::gauss_kronrod_15(integrand, u0, u1);
    return detail::PanelSegment{index, u0, u1, rule.value, rule.error};
  };
  for (std::size_t i = 0; i < panels.size(); ++i) {
    auto seg = integrate_segment(i, 0.0, 1.0);
    sum += seg.value;
    err += seg.error;
    queue.push(seg);
  }

  int subdivisions = 0;
  bool met = true;
  while (!queue.empty() && err > settings.rel_tol * std::abs(total + sum)) {
    if (subdivisions >= settings.max_subdivisions) {
      met = false;
      break;
    }
    const detail::PanelSegment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.u0 + worst.u1);
    const auto left = integrate_segment(worst.panel, worst.u0, mid);
    const auto right = integrate_segment(worst.panel, mid, worst.u1);
    sum += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++subdivisions;
  }
  // Recompute from the final segments to avoid drift in the running sums.
  double final_sum = 0.0;
  double final_err = 0.0;
  while (!queue.empty()) {
    final_sum += queue.top().value;
    final_err += queue.top().error;
    queue.pop();
  }
  return IntegralValue{total + final_sum, false, met, final_err};
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Uniform-sampling estimate of \int_{B(a,r)} |f|^p dx with its standard error.
/// Samples are drawn in fixed-size chunks, each with its own seeded engine, and
/// reduced in chunk order, so the result does not depend on the thread count.
inline MonteCarloEstimate mc_integrate(const RadialFunction& f, double p, const Ball& ball, int n,
                                       const IntegrationSettings& settings) {
  settings.validate();
  if (f.is_zero()) return {};
  constexpr std::int64_t kChunk = 1 << 15;
  const std::int64_t total = settings.mc_samples;
  const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);

  struct Moments {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::vector<Moments> partial(chunks);

  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 engine(detail::splitmix64(settings.rng_seed ^ detail::splitmix64(c)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t count = std::min(kChunk, total - begin);
    std::vector<double> x(n);
    Moments m;
    for (std::int64_t i = 0; i < count; ++i) {
      double norm2 = 0.0;
      for (int k = 0; k < n; ++k) {
        x[k] = normal(engine);
        norm2 += x[k] * x[k];
      }
      const double radius = ball.r * std::pow(uniform(engine), 1.0 / n) / std::sqrt(norm2);
      double t2 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double coord = x[k] * radius + (k == 0 ? ball.d : 0.0);
        t2 += coord * coord;
      }
      const double t = std::sqrt(t2);
      const double value = t > 0.0 ? std::pow(std::abs(f.eval(t)), p) : 0.0;
      ++m.count;
      const double delta = value - m.mean;
      m.mean += delta / static_cast<double>(m.count);
      m.m2 += delta * (value - m.mean);
    }
    partial[c] = m;
  });

  Moments acc;
  for (const Moments& m : partial) {
    if (m.count == 0) continue;
    const std::int64_t count = acc.count + m.count;
    const double delta = m.mean - acc.mean;
    acc.mean += delta * static_cast<double>(m.count) / static_cast<double>(count);
    acc.m2 += m.m2 + delta * delta * static_cast<double>(acc.count) * static_cast<double>(m.count) /
                         static_cast<double>(count);
    acc.count = count;
  }
  const double volume = VolumeConstants(n).ball_volume(ball.r);
  const double variance = acc.count > 1 ? acc.m2 / static_cast<double>(acc.count - 1) : 0.0;
  return {volume * acc.mean, volume * std::sqrt(variance / static_cast<double>(acc.count))};
}

}  // namespace morrey

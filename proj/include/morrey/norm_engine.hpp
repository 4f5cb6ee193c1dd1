#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "morrey/ball_integration.hpp"
#include "morrey/core_model.hpp"
#include "morrey/error.hpp"
#include "morrey/parallel.hpp"

namespace morrey {

struct SearchSettings {
  double r_min = 1e-3;          // lowered to 0.1 x the smallest breakpoint when that is smaller
  std::optional<double> r_max;  // default: 1e6 (Morrey), 1 - 1e-6 (small Morrey)
  std::optional<double> d_max;  // default: 10 + largest finite breakpoint
  int r_grid = 64;
  int d_grid = 33;
  int golden_steps = 40;
  int multistarts = 3;
  int sweeps = 2;
  int polish_evals = 120;  // Nelder-Mead budget after the coordinate sweeps

  double resolved_r_max(Mode mode) const {
    if (r_max) return *r_max;
    return mode == Mode::Morrey ? 1e6 : 1.0 - 1e-6;
  }

  double resolved_d_max(const RadialFunction& f) const {
    return d_max ? *d_max : 10.0 + f.last_finite_breakpoint();
  }

  void validate(Mode mode) const {
    const double rmax = resolved_r_max(mode);
    if (!(r_min > 0.0) || !(r_min < rmax)) throw Error(ErrorCode::InvalidArgument, "require 0 < r_min < r_max");
    if (mode == Mode::SmallMorrey && !(rmax < 1.0))
      throw Error(ErrorCode::InvalidArgument, "small Morrey search requires r_max < 1");
    if (d_max && !(*d_max >= 0.0)) throw Error(ErrorCode::InvalidArgument, "d_max must be >= 0");
    if (r_grid < 2 || d_grid < 2) throw Error(ErrorCode::InvalidArgument, "grid sizes must be >= 2");
    if (golden_steps < 0 || multistarts < 0 || sweeps < 0 || polish_evals < 0)
      throw Error(ErrorCode::InvalidArgument, "refinement counts must be >= 0");
  }
};

struct ProfileSample {
  double d;
  double r;
  double value;
};

struct NormResult {
  double value = 0.0;
  bool infinite = false;
  Ball argmax{0.0, 0.0};
  std::vector<ProfileSample> profile_samples;  // centered column of the grid
  bool truncated = false;    // sup still increasing at the r_max cutoff
  bool boundary_d = false;   // argmax sits on the d_max edge of the window
  bool tolerance_met = true;
};

/// |B|^{1/q - 1/p} (\int_B |f|^p)^{1/p} for one ball; +inf for a divergent integral.
inline double ball_functional(const RadialFunction& f, const SpaceParams& params, const Ball& ball,
                              const IntegrationSettings& integ, bool* tolerance_met = nullptr) {
  const IntegralValue integral = integrate_abs_pow_ball(f, params.p, ball, params.n, integ);
  if (tolerance_met && !integral.tolerance_met) *tolerance_met = false;
  if (integral.infinite) return kInf;
  const double volume = VolumeConstants(params.n).ball_volume(ball.r);
  return std::pow(volume, 1.0 / params.q - 1.0 / params.p) * std::pow(std::max(0.0, integral.value), 1.0 / params.p);
}

/// The centered-ball profile r -> |B(0,r)|^{1/q-1/p} (\int_{B(0,r)} |f|^p)^{1/p}.
inline double centered_norm_profile(const RadialFunction& f, const SpaceParams& params, double r) {
  if (!params.admits_radius(r)) throw Error(ErrorCode::InvalidArgument, "radius outside the mode's domain");
  const IntegralValue integral = integrate_abs_pow_centered(f, params.p, r, params.n);
  if (integral.infinite) return kInf;
  const double volume = VolumeConstants(params.n).ball_volume(r);
  return std::pow(volume, 1.0 / params.q - 1.0 / params.p) * std::pow(integral.value, 1.0 / params.p);
}

/// Exact membership test from the power behaviour at 0 and at infinity.
/// Away from those two ends every piece is bounded, so the profile is too.
inline bool in_space(const RadialFunction& f, const SpaceParams& params) {
  if (f.is_zero()) return true;
  const double critical = params.critical_exponent();
  const double tol = 1e-12 * std::max(1.0, std::abs(critical));
  const Piece& first = f.pieces().front();
  if (first.lo == 0.0) {
    if (first.alpha * params.p + params.n <= 0.0) return false;
    if (first.alpha < critical - tol) return false;
  }
  const Piece& last = f.pieces().back();
  if (params.mode == Mode::Morrey && std::isinf(last.hi)) {
    if (last.alpha > critical + tol) return false;
    if (params.p == params.q && std::abs(last.alpha - critical) <= tol) return false;
  }
  return true;
}

/// v_n^{1/q} (1 - p/q)^{-1/p}: the norm of |x|^{-n/q} in both spaces.
inline double closed_form_power_norm(const SpaceParams& params) {
  if (!(params.p < params.q)) throw Error(ErrorCode::InvalidArgument, "closed form requires p < q");
  const VolumeConstants vc(params.n);
  return std::pow(vc.unit_ball_volume, 1.0 / params.q) * std::pow(1.0 - params.p / params.q, -1.0 / params.p);
}

namespace detail {

// Strict "better" ordering: larger value, then smaller (d, r).
inline bool better(double value, const Ball& ball, double best_value, const Ball& best_ball) {
  if (value != best_value) return value > best_value;
  if (ball.d != best_ball.d) return ball.d < best_ball.d;
  return ball.r < best_ball.r;
}

// Maximizes fn on [lo, hi] by golden-section; returns the best point probed.
template <typename Fn>
std::pair<double, double> golden_maximize(const Fn& fn, double lo, double hi, int steps) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  double best_x = f1 >= f2 ? x1 : x2;
  double best_f = std::max(f1, f2);
  for (int i = 0; i < steps; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
      if (f1 > best_f) {
        best_f = f1;
        best_x = x1;
      }
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
      if (f2 > best_f) {
        best_f = f2;
        best_x = x2;
      }
    }
  }
  return {best_x, best_f};
}

// Finite breakpoints > 0, ascending and deduplicated.
inline std::vector<double> positive_breakpoints(const RadialFunction& f) {
  std::vector<double> out;
  for (const Piece& piece : f.pieces()) {
    if (piece.lo > 0.0) out.push_back(piece.lo);
    if (std::isfinite(piece.hi)) out.push_back(piece.hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Nelder-Mead maximization of fn(x, y) on the box [x_lo, x_hi] x [y_lo, y_hi]
// starting from (x0, y0); points outside the box score -inf.
template <typename Fn>
std::array<double, 3> nelder_mead_maximize(const Fn& fn, double x0, double y0, double x_lo, double x_hi, double y_lo,
                                           double y_hi, int max_evals) {
  auto score = [&](double x, double y) {
    if (x < x_lo || x > x_hi || y < y_lo || y > y_hi) return -kInf;
    return fn(x, y);
  };
  const double hx = 0.1 * (x_hi - x_lo);
  const double hy = 0.1 * (y_hi - y_lo);
  std::array<std::array<double, 3>, 3> s{};  // {x, y, value}
  s[0] = {x0, y0, score(x0, y0)};
  s[1] = {x0 + hx <= x_hi ? x0 + hx : x0 - hx, y0, 0.0};
  s[2] = {x0, y0 + hy <= y_hi ? y0 + hy : y0 - hy, 0.0};
  s[1][2] = score(s[1][0], s[1][1]);
  s[2][2] = score(s[2][0], s[2][1]);
  int evals = 3;
  auto by_value = [](const auto& a, const auto& b) { return a[2] > b[2]; };
  while (evals < max_evals) {
    std::sort(s.begin(), s.end(), by_value);
    if (std::abs(s[0][0] - s[2][0]) <= 1e-13 * (x_hi - x_lo) && std::abs(s[0][1] - s[2][1]) <= 1e-13 * (y_hi - y_lo))
      break;
    const double cx = 0.5 * (s[0][0] + s[1][0]);
    const double cy = 0.5 * (s[0][1] + s[1][1]);
    const double rx = 2 * cx - s[2][0], ry = 2 * cy - s[2][1];
    const double rv = score(rx, ry);
    ++evals;
    if (rv > s[0][2]) {
      const double ex = 3 * cx - 2 * s[2][0], ey = 3 * cy - 2 * s[2][1];
      const double ev = score(ex, ey);
      ++evals;
      s[2] = ev > rv ? std::array<double, 3>{ex, ey, ev} : std::array<double, 3>{rx, ry, rv};
    } else if (rv > s[1][2]) {
      s[2] = {rx, ry, rv};
    } else {
      const double kx = 0.5 * (cx + s[2][0]), ky = 0.5 * (cy + s[2][1]);
      const double kv = score(kx, ky);
      ++evals;
      if (kv > s[2][2]) {
        s[2] = {kx, ky, kv};
      } else {
        for (int m = 1; m < 3; ++m) {
          s[m][0] = 0.5 * (s[0][0] + s[m][0]);
          s[m][1] = 0.5 * (s[0][1] + s[m][1]);
          s[m][2] = score(s[m][0], s[m][1]);
        }
        evals += 2;
      }
    }
  }
  std::sort(s.begin(), s.end(), by_value);
  return s[0];
}

inline NormResult search_norm(const RadialFunction& f, const SpaceParams& params, const SearchSettings& search,
                              const IntegrationSettings& integ) {
  search.validate(params.mode);
  integ.validate();
  NormResult result;
  const double r_max = search.resolved_r_max(params.mode);
  const std::vector<double> breaks = positive_breakpoints(f);
  // Reach below the smallest breakpoint so thin inner pieces are resolved.
  const double r_min = breaks.empty() ? search.r_min : std::min(search.r_min, 0.1 * breaks.front());
  result.argmax = Ball{0.0, r_min};
  if (f.is_zero()) return result;
  if (!in_space(f, params)) {
    result.value = kInf;
    result.infinite = true;
    return result;
  }
  const double d_max = search.resolved_d_max(f);
  const int nr = search.r_grid;
  const int nd = search.d_grid;
  const double log_r_min = std::log(r_min);
  const double log_r_max = std::log(r_max);
  std::vector<double> radii(nr);
  for (int i = 0; i < nr; ++i)
    radii[i] = i == nr - 1 ? r_max : std::exp(log_r_min + (log_r_max - log_r_min) * i / (nr - 1));
  radii[0] = r_min;
  std::vector<double> centers(nd);
  for (int j = 0; j < nd; ++j) centers[j] = d_max * j / (nd - 1);

  std::vector<double> grid(static_cast<std::size_t>(nr) * nd);
  std::vector<char> grid_ok(grid.size(), 1);
  parallel_for(grid.size(), [&](std::size_t idx) {
    const int j = static_cast<int>(idx / nr);
    const int i = static_cast<int>(idx % nr);
    bool ok = true;
    grid[idx] = ball_functional(f, params, Ball{centers[j], radii[i]}, integ, &ok);
    grid_ok[idx] = ok;
  });
  result.tolerance_met = std::all_of(grid_ok.begin(), grid_ok.end(), [](char ok) { return ok != 0; });
  for (int i = 0; i < nr; ++i) result.profile_samples.push_back({0.0, radii[i], grid[i]});

  double best_value = -1.0;
  Ball best_ball{0.0, r_min};
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Ball ball{centers[idx / nr], radii[idx % nr]};
    if (std::isinf(grid[idx])) {
      result.value = kInf;
      result.infinite = true;
      result.argmax = ball;
      return result;
    }
    if (better(grid[idx], ball, best_value, best_ball)) {
      best_value = grid[idx];
      best_ball = ball;
    }
  }

  // Balls whose boundary is tangent to breakpoint spheres: centered at each
  // breakpoint radius, and spanning each pair of radii b1 < b2 along a ray.
  std::vector<Ball> special;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    special.push_back({0.0, breaks[k]});
    for (std::size_t m = 0; m <= k; ++m) {
      const double b1 = m == 0 ? 0.0 : breaks[m - 1];
      special.push_back({0.5 * (b1 + breaks[k]), 0.5 * (breaks[k] - b1)});
    }
  }
  std::erase_if(special, [&](const Ball& b) { return b.r < r_min || b.r > r_max || b.d > d_max; });
  std::vector<double> special_value(special.size());
  parallel_for(special.size(), [&](std::size_t k) {
    special_value[k] = ball_functional(f, params, special[k], integ);
  });
  std::optional<std::size_t> best_special;
  for (std::size_t k = 0; k < special.size(); ++k) {
    if (std::isinf(special_value[k])) continue;
    if (!best_special || better(special_value[k], special[k], special_value[*best_special], special[*best_special]))
      best_special = k;
  }

  // Refinement seeds: top grid cells by value (same tie-break) plus the best
  // special ball, each with a bracket of one grid cell on either side.
  struct Seed {
    Ball ball;
    double value;
    double lr_lo, lr_hi, d_lo, d_hi;
  };
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return better(grid[x], Ball{centers[x / nr], radii[x % nr]}, grid[y], Ball{centers[y / nr], radii[y % nr]});
  });
  std::vector<Seed> seeds;
  for (std::size_t s = 0; s < std::min<std::size_t>(search.multistarts, order.size()); ++s) {
    const std::size_t idx = order[s];
    const int j = static_cast<int>(idx / nr);
    const int i = static_cast<int>(idx % nr);
    seeds.push_back({Ball{centers[j], radii[i]}, grid[idx], std::log(radii[std::max(i - 1, 0)]),
                     std::log(radii[std::min(i + 1, nr - 1)]), centers[std::max(j - 1, 0)],
                     centers[std::min(j + 1, nd - 1)]});
  }
  if (best_special && search.multistarts > 0) {
    const Ball b = special[*best_special];
    const double log_step = (log_r_max - log_r_min) / (nr - 1);
    const double d_step = d_max / (nd - 1);
    seeds.push_back({b, special_value[*best_special], std::max(log_r_min, std::log(b.r) - log_step),
                     std::min(log_r_max, std::log(b.r) + log_step), std::max(0.0, b.d - d_step),
                     std::min(d_max, b.d + d_step)});
  }

  struct Refined {
    double value;
    Ball ball;
    bool ok;
  };
  std::vector<Refined> refined(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    const Seed& seed = seeds[s];
    const double lr_lo = seed.lr_lo;
    const double lr_hi = seed.lr_hi;
    const double r_lo = std::exp(lr_lo);
    const double r_hi = std::exp(lr_hi);
    const double d_lo = seed.d_lo;
    const double d_hi = seed.d_hi;
    Ball cur = seed.ball;
    double cur_value = seed.value;
    bool ok = true;
    for (int sweep = 0; sweep < search.sweeps; ++sweep) {
      auto along_r = [&](double log_r) {
        return ball_functional(f, params, Ball{cur.d, std::exp(log_r)}, integ, &ok);
      };
      auto [lr, vr] = golden_maximize(along_r, lr_lo, lr_hi, search.golden_steps);
      const Ball cand_r{cur.d, std::exp(lr)};
      if (better(vr, cand_r, cur_value, cur)) {
        cur = cand_r;
        cur_value = vr;
      }
      // Kinks where the sphere |x - a| = r is tangent to a breakpoint sphere.
      for (double b : breaks) {
        for (double r : {b, std::abs(b - cur.d), b + cur.d}) {
          if (!(r >= r_lo && r <= r_hi)) continue;
          const Ball cand{cur.d, r};
          const double v = ball_functional(f, params, cand, integ, &ok);
          if (better(v, cand, cur_value, cur)) {
            cur = cand;
            cur_value = v;
          }
        }
      }
      auto along_d = [&](double d) { return ball_functional(f, params, Ball{d, cur.r}, integ, &ok); };
      auto [dd, vd] = golden_maximize(along_d, d_lo, d_hi, search.golden_steps);
      const Ball cand_d{dd, cur.r};
      if (better(vd, cand_d, cur_value, cur)) {
        cur = cand_d;
        cur_value = vd;
      }
      for (double b : breaks) {
        for (double d : {b - cur.r, cur.r - b, b + cur.r}) {
          if (!(d >= d_lo && d <= d_hi)) continue;
          const Ball cand{d, cur.r};
          const double v = ball_functional(f, params, cand, integ, &ok);
          if (better(v, cand, cur_value, cur)) {
            cur = cand;
            cur_value = v;
          }
        }
      }
    }
    // Polish along ridges that coordinate steps cross only slowly.
    const auto [lr, dd, v] = nelder_mead_maximize(
        [&](double log_r, double d) { return ball_functional(f, params, Ball{d, std::exp(log_r)}, integ, &ok); },
        std::log(cur.r), cur.d, lr_lo, lr_hi, d_lo, d_hi, search.polish_evals);
    const Ball polished{dd, std::exp(lr)};
    if (std::isfinite(v) && better(v, polished, cur_value, cur)) {
      cur = polished;
      cur_value = v;
    }
    refined[s] = Refined{cur_value, cur, ok};
  });
  for (std::size_t k = 0; k < special.size(); ++k) {
    if (better(special_value[k], special[k], best_value, best_ball)) {
      best_value = special_value[k];
      best_ball = special[k];
    }
  }
  for (const Refined& cand : refined) {
    if (!cand.ok) result.tolerance_met = false;
    if (std::isinf(cand.value)) {
      result.value = kInf;
      result.infinite = true;
      result.argmax = cand.ball;
      return result;
    }
    if (better(cand.value, cand.ball, best_value, best_ball)) {
      best_value = cand.value;
      best_ball = cand.ball;
    }
  }

  result.value = best_value;
  result.argmax = best_ball;
  if (best_ball.r >= radii[nr - 2]) {
    const double at_cutoff = ball_functional(f, params, Ball{best_ball.d, r_max}, integ);
    const double before = ball_functional(f, params, Ball{best_ball.d, radii[nr - 2]}, integ);
    result.truncated = at_cutoff > before * (1.0 + 1e-9);
  }
  result.boundary_d = d_max > 0.0 && best_ball.d >= d_max * (1.0 - 1e-9);
  return result;
}

}  // namespace detail

/// sup over all balls (d <= d_max, r in [r_min, r_max]) of the Morrey functional.
inline NormResult morrey_norm(const RadialFunction& f, const SpaceParams& params, const SearchSettings& search = {},
                              const IntegrationSettings& integ = {}) {
  if (params.mode != Mode::Morrey) throw Error(ErrorCode::InvalidArgument, "morrey_norm needs Morrey mode");
  return detail::search_norm(f, params, search, integ);
}

/// Same search with radii restricted to (0, r_max], r_max < 1.
inline NormResult small_morrey_norm(const RadialFunction& f, const SpaceParams& params,
                                    const SearchSettings& search = {}, const IntegrationSettings& integ = {}) {
  if (params.mode != Mode::SmallMorrey)
    throw Error(ErrorCode::InvalidArgument, "small_morrey_norm needs SmallMorrey mode");
  return detail::search_norm(f, params, search, integ);
}

/// Dispatches on params.mode.
inline NormResult norm(const RadialFunction& f, const SpaceParams& params, const SearchSettings& search = {},
                       const IntegrationSettings& integ = {}) {
  return params.mode == Mode::Morrey ? morrey_norm(f, params, search, integ)
                                     : small_morrey_norm(f, params, search, integ);
}

/// Memoizing front end over norm(); keyed by the exact serialized function.
class NormEvaluator {
 public:
  NormEvaluator(SpaceParams params, SearchSettings search = {}, IntegrationSettings integ = {})
      : params_(params), search_(search), integ_(integ) {
    search_.validate(params_.mode);
    integ_.validate();
  }

  const SpaceParams& params() const { return params_; }
  const SearchSettings& search() const { return search_; }
  const IntegrationSettings& integration() const { return integ_; }

  NormResult evaluate(const RadialFunction& f) {
    const std::string key = serialize(f, ";");
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    NormResult result = norm(f, params_, search_, integ_);
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(result)).first->second;
  }

  double value(const RadialFunction& f) { return evaluate(f).value; }

 private:
  SpaceParams params_;
  SearchSettings search_;
  IntegrationSettings integ_;
  std::mutex mutex_;
  std::map<std::string, NormResult> cache_;
};

}  // namespace morrey

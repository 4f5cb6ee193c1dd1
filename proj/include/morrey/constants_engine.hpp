#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "morrey/ball_integration.hpp"
#include "morrey/core_model.hpp"
#include "morrey/error.hpp"
#include "morrey/norm_engine.hpp"
#include "morrey/parallel.hpp"

namespace morrey {

enum class ConstantType { GenVNJ, ModVNJ, GenModVNJ, Zbaganu };

/// One of the four geometric constants; `s` is used by the generalized kinds.
struct ConstantKind {
  ConstantType type = ConstantType::GenVNJ;
  double s = 2.0;

  static ConstantKind gen_vnj(double s) { return make(ConstantType::GenVNJ, s); }
  static ConstantKind mod_vnj() { return ConstantKind{ConstantType::ModVNJ, 2.0}; }
  static ConstantKind gen_mod_vnj(double s) { return make(ConstantType::GenModVNJ, s); }
  static ConstantKind zbaganu() { return ConstantKind{ConstantType::Zbaganu, 1.0}; }

  static ConstantKind make(ConstantType type, double s) {
    if (!(s >= 1.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "s must satisfy 1 <= s < inf");
    if (type == ConstantType::ModVNJ) s = 2.0;
    if (type == ConstantType::Zbaganu) s = 1.0;
    return ConstantKind{type, s};
  }

  bool uses_s() const { return type == ConstantType::GenVNJ || type == ConstantType::GenModVNJ; }
  bool normalizes() const { return type == ConstantType::ModVNJ || type == ConstantType::GenModVNJ; }

  std::string name() const {
    switch (type) {
      case ConstantType::GenVNJ: return "gen_vnj";
      case ConstantType::ModVNJ: return "mod_vnj";
      case ConstantType::GenModVNJ: return "gen_mod_vnj";
      case ConstantType::Zbaganu: return "zbaganu";
    }
    return "unknown";
  }

  std::string label() const {
    return uses_s() ? name() + "(s=" + format_number(s) + ")" : name();
  }
};

/// Norms entering the ratio functionals for one pair (x, y).
/// unit_sum/unit_diff are the norms of x/|x| +- y/|y| (NaN when not computed).
struct PairNorms {
  double x = 0.0;
  double y = 0.0;
  double sum = 0.0;
  double diff = 0.0;
  double unit_sum = std::numeric_limits<double>::quiet_NaN();
  double unit_diff = std::numeric_limits<double>::quiet_NaN();
};

inline PairNorms pair_norms(const RadialFunction& x, const RadialFunction& y, NormEvaluator& evaluator,
                            bool with_normalized = true) {
  auto checked = [&](const RadialFunction& fn) {
    const NormResult result = evaluator.evaluate(fn);
    if (result.infinite) throw Error(ErrorCode::NotInSpace, "function is not in the space: " + serialize(fn, "; "));
    return result.value;
  };
  PairNorms norms;
  norms.x = checked(x);
  norms.y = checked(y);
  if (norms.x == 0.0 || norms.y == 0.0) throw Error(ErrorCode::ZeroFunction, "ratio needs nonzero x and y");
  norms.sum = checked(add(x, y));
  norms.diff = checked(subtract(x, y));
  if (with_normalized) {
    const RadialFunction xu = scale(x, 1.0 / norms.x);
    const RadialFunction yu = scale(y, 1.0 / norms.y);
    norms.unit_sum = checked(add(xu, yu));
    norms.unit_diff = checked(subtract(xu, yu));
  }
  return norms;
}

inline double ratio_from_norms(const ConstantKind& kind, const PairNorms& n) {
  const double s = kind.s;
  switch (kind.type) {
    case ConstantType::GenVNJ:
      return (std::pow(n.sum, s) + std::pow(n.diff, s)) /
             (std::pow(2.0, s - 1.0) * (std::pow(n.x, s) + std::pow(n.y, s)));
    case ConstantType::ModVNJ:
      return (n.unit_sum * n.unit_sum + n.unit_diff * n.unit_diff) / 4.0;
    case ConstantType::GenModVNJ:
      return (std::pow(n.unit_sum, s) + std::pow(n.unit_diff, s)) / std::pow(2.0, s);
    case ConstantType::Zbaganu:
      return n.sum * n.diff / (n.x * n.x + n.y * n.y);
  }
  return 0.0;
}

/// Value of the ratio functional of `kind` at (x, y) in the evaluator's space.
inline double ratio(const ConstantKind& kind, const RadialFunction& x, const RadialFunction& y,
                    NormEvaluator& evaluator) {
  return ratio_from_norms(kind, pair_norms(x, y, evaluator, kind.normalizes()));
}

// ---------------------------------------------------------------------------
// Witness functions.

/// f, its truncations g (inner) and h (outer), and k = g - h.
struct WitnessFamily {
  RadialFunction f;
  RadialFunction g;
  RadialFunction h;
  RadialFunction k;
  double epsilon = 1.0;  // split radius between g and h
};

/// f = |x|^{-n/q} on (0, inf), split at |x| = 1.
inline WitnessFamily witness_family_morrey(const SpaceParams& params) {
  if (!(params.p < params.q)) throw Error(ErrorCode::InvalidArgument, "witnesses require p < q");
  if (params.mode != Mode::Morrey) throw Error(ErrorCode::InvalidArgument, "Morrey witnesses need Morrey mode");
  const double alpha = params.critical_exponent();
  WitnessFamily w;
  w.f = RadialFunction::power(1.0, alpha);
  w.g = RadialFunction::power(1.0, alpha, 0.0, 1.0);
  w.h = subtract(w.f, w.g);
  w.k = subtract(w.g, w.h);
  w.epsilon = 1.0;
  return w;
}

/// f = |x|^{-n/q} on (0, 1), split at |x| = epsilon.
inline WitnessFamily witness_family_small_morrey(const SpaceParams& params, double epsilon) {
  if (!(params.p < params.q)) throw Error(ErrorCode::InvalidArgument, "witnesses require p < q");
  if (params.mode != Mode::SmallMorrey)
    throw Error(ErrorCode::InvalidArgument, "small Morrey witnesses need SmallMorrey mode");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0,1)");
  const double alpha = params.critical_exponent();
  WitnessFamily w;
  w.f = RadialFunction::power(1.0, alpha, 0.0, 1.0);
  w.g = RadialFunction::power(1.0, alpha, 0.0, epsilon);
  w.h = subtract(w.f, w.g);
  w.k = subtract(w.g, w.h);
  w.epsilon = epsilon;
  return w;
}

inline std::pair<RadialFunction, RadialFunction> witness_pair_morrey(const SpaceParams& params) {
  WitnessFamily w = witness_family_morrey(params);
  return {std::move(w.f), std::move(w.k)};
}

inline std::pair<RadialFunction, RadialFunction> witness_pair_small_morrey(const SpaceParams& params,
                                                                           double epsilon) {
  WitnessFamily w = witness_family_small_morrey(params, epsilon);
  return {std::move(w.f), std::move(w.k)};
}

/// Analytic lower bound on the small-Morrey witness ratio at split radius epsilon:
/// 1 + (1 - eps^{n(1-p/q)})^{s/p} for the VNJ family (s = 2 for ModVNJ) and
/// 2 (1 - eps^{n(1-p/q)})^{1/p} for Zbaganu.
inline double theorem2_lower_bound(const SpaceParams& params, double epsilon, const ConstantKind& kind) {
  if (!(params.p < params.q)) throw Error(ErrorCode::InvalidArgument, "bound requires p < q");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0,1)");
  const double base = 1.0 - std::pow(epsilon, params.n * (1.0 - params.p / params.q));
  if (kind.type == ConstantType::Zbaganu) return 2.0 * std::pow(base, 1.0 / params.p);
  const double s = kind.type == ConstantType::ModVNJ ? 2.0 : kind.s;
  return 1.0 + std::pow(base, s / params.p);
}

// ---------------------------------------------------------------------------
// Candidate pairs and the estimator.

struct CandidatePair {
  std::string label;
  RadialFunction x;
  RadialFunction y;
};

inline const std::vector<double>& default_epsilon_ladder() {
  static const std::vector<double> ladder{0.5, 0.1, 0.01, 1e-4};
  return ladder;
}

/// Random pair on a shared random partition with exponent -n/q on every cell,
/// so x + y and x - y are always representable. Depends only on (seed, index).
inline CandidatePair random_pair(const SpaceParams& params, std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 engine(detail::splitmix64(seed ^ detail::splitmix64(index + 0x51ed2701ULL)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cell_count(1, 4);
  const int cells = cell_count(engine);
  std::vector<double> cuts(cells + 1);
  for (double& cut : cuts) cut = std::pow(10.0, -2.0 + 4.0 * unit(engine));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (cuts.size() < 2) cuts.push_back(2.0 * cuts.back());
  if (unit(engine) < 0.5) cuts.front() = 0.0;
  if (unit(engine) < 0.5) cuts.back() = kInf;
  const double alpha = params.critical_exponent();
  auto draw_coef = [&] { return unit(engine) < 0.2 ? 0.0 : -2.0 + 4.0 * unit(engine); };

  std::vector<Piece> xs;
  std::vector<Piece> ys;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    xs.push_back({cuts[c], cuts[c + 1], draw_coef(), alpha});
    ys.push_back({cuts[c], cuts[c + 1], draw_coef(), alpha});
  }
  CandidatePair pair{"random#" + std::to_string(index), RadialFunction::canonicalize(xs),
                     RadialFunction::canonicalize(ys)};
  if (pair.x.is_zero()) pair.x = RadialFunction::power(1.0, alpha, cuts[0], cuts[1]);
  if (pair.y.is_zero()) pair.y = RadialFunction::power(-1.0, alpha, cuts[0], cuts[1]);
  return pair;
}

/// Witness pair(s) for the mode plus the trivial pair (f, f).
inline std::vector<CandidatePair> default_candidates(const SpaceParams& params,
                                                     const std::vector<double>& epsilon_ladder) {
  std::vector<CandidatePair> out;
  if (!(params.p < params.q)) return out;
  if (params.mode == Mode::Morrey) {
    auto [f, k] = witness_pair_morrey(params);
    out.push_back({"witness", f, k});
    out.push_back({"trivial", f, f});
  } else {
    for (double eps : epsilon_ladder) {
      auto [f, k] = witness_pair_small_morrey(params, eps);
      out.push_back({"witness(eps=" + format_number(eps) + ")", f, k});
    }
    const RadialFunction f = witness_family_small_morrey(params, 0.5).f;
    out.push_back({"trivial", f, f});
  }
  return out;
}

/// Norms of one candidate pair, or the reason it was skipped.
struct PairEvaluation {
  std::optional<PairNorms> norms;
  std::string error;
};

/// Evaluates all pairs (in parallel); slot i always holds pair i.
inline std::vector<PairEvaluation> evaluate_pairs(const std::vector<CandidatePair>& pairs, NormEvaluator& evaluator,
                                                  bool with_normalized) {
  std::vector<PairEvaluation> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    try {
      out[i].norms = pair_norms(pairs[i].x, pairs[i].y, evaluator, with_normalized);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

struct RatioTrace {
  std::string label;
  double ratio = 0.0;
  bool skipped = false;
};

struct ConstantEstimate {
  ConstantKind kind;
  double best_ratio = 0.0;
  std::string best_label;
  RadialFunction witness_x;
  RadialFunction witness_y;
  int n_pairs_tried = 0;
  int n_skipped = 0;
  std::vector<RatioTrace> trace;
};

struct EstimateOptions {
  /// Replaces the default witness/trivial candidates when set.
  std::optional<std::vector<CandidatePair>> candidates;
  int random_trials = 0;
  std::uint64_t seed = 1;
  std::vector<double> epsilon_ladder = default_epsilon_ladder();
};

inline std::vector<CandidatePair> build_candidates(const SpaceParams& params, const EstimateOptions& options) {
  if (options.random_trials < 0) throw Error(ErrorCode::InvalidArgument, "random_trials must be >= 0");
  std::vector<CandidatePair> pairs =
      options.candidates ? *options.candidates : default_candidates(params, options.epsilon_ladder);
  for (int i = 0; i < options.random_trials; ++i)
    pairs.push_back(random_pair(params, options.seed, static_cast<std::uint64_t>(i)));
  return pairs;
}

/// Best ratio over an evaluated candidate set; ties keep the lower index.
inline ConstantEstimate reduce_estimate(const ConstantKind& kind, const std::vector<CandidatePair>& pairs,
                                        const std::vector<PairEvaluation>& evals) {
  ConstantEstimate est;
  est.kind = kind;
  est.best_ratio = -kInf;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ++est.n_pairs_tried;
    if (!evals[i].norms) {
      ++est.n_skipped;
      est.trace.push_back({pairs[i].label, 0.0, true});
      continue;
    }
    const double value = ratio_from_norms(kind, *evals[i].norms);
    est.trace.push_back({pairs[i].label, value, false});
    if (value > est.best_ratio) {
      est.best_ratio = value;
      est.best_label = pairs[i].label;
      est.witness_x = pairs[i].x;
      est.witness_y = pairs[i].y;
    }
  }
  if (est.n_skipped == est.n_pairs_tried) est.best_ratio = 0.0;
  return est;
}

/// Lower estimate of the constant: max of the ratio over the candidate set.
inline ConstantEstimate estimate_constant(const ConstantKind& kind, NormEvaluator& evaluator,
                                          const EstimateOptions& options = {}) {
  const std::vector<CandidatePair> pairs = build_candidates(evaluator.params(), options);
  const auto evals = evaluate_pairs(pairs, evaluator, kind.normalizes());
  return reduce_estimate(kind, pairs, evals);
}

}  // namespace morrey

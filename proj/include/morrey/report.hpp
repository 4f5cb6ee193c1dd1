#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "morrey/ball_integration.hpp"
#include "morrey/config.hpp"
#include "morrey/constants_engine.hpp"
#include "morrey/core_model.hpp"
#include "morrey/norm_engine.hpp"

namespace morrey {

inline constexpr const char* kToolVersion = "1.0.0";

using ojson = nlohmann::ordered_json;

/// One verdict: pass iff lower <= computed <= upper.
struct Check {
  std::string name;
  double expected = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;

  static Check range(std::string name, double expected, double computed, double lower, double upper) {
    const double tol = std::max(expected - lower, upper - expected);
    return Check{std::move(name), expected, computed, tol, lower, upper, lower <= computed && computed <= upper};
  }
  /// |computed - expected| <= rel * |expected|
  static Check relative(std::string name, double expected, double computed, double rel) {
    const double slack = rel * std::abs(expected);
    Check c = range(std::move(name), expected, computed, expected - slack, expected + slack);
    c.tolerance = rel;
    return c;
  }
  static Check at_least(std::string name, double bound, double computed, double tol) {
    return Check{std::move(name), bound, computed, tol, bound - tol, kInf, computed >= bound - tol};
  }
  static Check at_most(std::string name, double bound, double computed, double tol) {
    return Check{std::move(name), bound, computed, tol, -kInf, bound + tol, computed <= bound + tol};
  }
  static Check flag(std::string name, bool value) {
    return Check{std::move(name), 1.0, value ? 1.0 : 0.0, 0.0, 1.0, 1.0, value};
  }

  ojson to_json() const {
    ojson j;
    j["name"] = name;
    j["pass"] = pass;
    j["expected"] = expected;
    j["computed"] = computed;
    j["tolerance"] = tolerance;
    j["lower"] = lower;
    j["upper"] = upper;
    return j;
  }
};

struct Report {
  std::string command;
  ojson config;
  ojson results = ojson::object();
  std::vector<Check> checks;
  std::optional<double> wall_time;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  ojson to_json() const {
    ojson j;
    j["tool"] = "morrey";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["config"] = config;
    j["results"] = results;
    ojson list = ojson::array();
    for (const Check& c : checks) list.push_back(c.to_json());
    j["checks"] = list;
    j["all_pass"] = all_pass();
    if (wall_time) j["wall_time_s"] = *wall_time;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Emission. Numbers are printed with 17 significant digits; non-finite
// numbers become the strings "inf", "-inf", "nan".

namespace detail {

inline void write_json(const ojson& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ojson(it.key()).dump() + ": ";
        write_json(it.value(), out, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& element : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_json(element, out, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        out += format_number(v);
      } else {
        out += std::isnan(v) ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\"");
      }
      return;
    }
    default:
      out += j.dump();
  }
}

inline void flatten(const ojson& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), rows);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", rows);
  } else if (j.is_number_float()) {
    rows.emplace_back(path, format_number(j.get<double>()));
  } else if (j.is_string()) {
    rows.emplace_back(path, j.get<std::string>());
  } else {
    rows.emplace_back(path, j.dump());
  }
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string to_json_text(const Report& report) {
  std::string out;
  detail::write_json(report.to_json(), out, 2, 0);
  return out + "\n";
}

/// Two columns, "path,value": every leaf of the JSON report, in the same order.
inline std::string to_csv_text(const Report& report) {
  std::vector<std::pair<std::string, std::string>> rows;
  detail::flatten(report.to_json(), "", rows);
  std::string out = "path,value\n";
  for (const auto& [path, value] : rows) out += detail::csv_escape(path) + "," + detail::csv_escape(value) + "\n";
  return out;
}

inline std::string render(const Report& report, OutputFormat format) {
  return format == OutputFormat::Json ? to_json_text(report) : to_csv_text(report);
}

// ---------------------------------------------------------------------------
// JSON views of domain results.

inline ojson pieces_json(const RadialFunction& f) {
  ojson arr = ojson::array();
  for (const Piece& piece : f.pieces()) arr.push_back(ojson::array({piece.lo, piece.hi, piece.coef, piece.alpha}));
  return arr;
}

inline ojson norm_json(const NormResult& r, bool with_profile = false) {
  ojson j;
  j["value"] = r.value;
  j["infinite"] = r.infinite;
  j["argmax_d"] = r.argmax.d;
  j["argmax_r"] = r.argmax.r;
  j["truncated"] = r.truncated;
  j["boundary_d"] = r.boundary_d;
  j["tolerance_met"] = r.tolerance_met;
  if (with_profile) {
    ojson samples = ojson::array();
    for (const ProfileSample& s : r.profile_samples) samples.push_back(ojson::array({s.r, s.value}));
    j["centered_profile"] = samples;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Commands.

namespace detail {

inline Report start_report(const std::string& command, const RunConfig& config) {
  Report report;
  report.command = command;
  report.config = config.echo();
  return report;
}

inline void finish_report(Report& report, const RunConfig& config,
                          std::chrono::steady_clock::time_point started) {
  if (config.timing)
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

inline SpaceParams strict_params(const RunConfig& config, Mode mode, const char* what) {
  if (!(config.space.p < config.space.q))
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " requires p < q (got p = " +
                                                format_number(config.space.p) + ", q = " +
                                                format_number(config.space.q) + ")");
  return SpaceParams::make_strict(config.space.n, config.space.p, config.space.q, mode);
}

}  // namespace detail

/// Norm of the function given by config.function_spec in config.space.
inline Report cmd_norm(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  Report report = detail::start_report("norm", config);
  const RadialFunction f = parse_function(config.function_spec);
  const SpaceParams params = SpaceParams::make(config.space.n, config.space.p, config.space.q, config.space.mode);
  const NormResult result = norm(f, params, config.search, config.integ);
  report.results["function"] = pieces_json(f);
  report.results["norm"] = norm_json(result, true);
  if (params.p < params.q) report.results["reference_power_norm"] = closed_form_power_norm(params);
  detail::finish_report(report, config, started);
  return report;
}

/// Lower edge of the Morrey witness ratio window.
inline constexpr double kTheorem1RatioWindow = 0.02;
/// Upper slack allowed above 2 for witness ratios.
inline constexpr double kRatioUpperSlack = 1e-9;

inline Report cmd_verify_theorem1(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  const SpaceParams params = detail::strict_params(config, Mode::Morrey, "verify-thm1");
  Report report = detail::start_report("verify-thm1", config);
  report.config["mode"] = to_string(Mode::Morrey);
  NormEvaluator evaluator(params, config.search, config.integ);
  const WitnessFamily w = witness_family_morrey(params);

  const NormResult nf = evaluator.evaluate(w.f);
  const NormResult ng = evaluator.evaluate(w.g);
  const NormResult nh = evaluator.evaluate(w.h);
  const NormResult nk = evaluator.evaluate(w.k);
  const double closed = closed_form_power_norm(params);
  const double r_max = config.search.resolved_r_max(Mode::Morrey);
  const double deficit = std::pow(r_max, -params.n * (1.0 - params.p / params.q) / params.p);

  ojson norms;
  norms["f"] = norm_json(nf);
  norms["g"] = norm_json(ng);
  norms["h"] = norm_json(nh);
  norms["k"] = norm_json(nk);
  report.results["closed_form_norm"] = closed;
  report.results["h_expected_relative_deficit"] = deficit;
  report.results["norms"] = norms;
  report.results["witness"] = {{"f", pieces_json(w.f)}, {"k", pieces_json(w.k)}};

  report.checks.push_back(Check::relative("norm_f_closed_form", closed, nf.value, 1e-3));
  report.checks.push_back(Check::relative("norm_g_equals_norm_f", nf.value, ng.value, 1e-3));
  report.checks.push_back(Check::relative("norm_k_equals_norm_f", nf.value, nk.value, 1e-3));
  report.checks.push_back(Check::relative("norm_h_within_truncation_deficit", nf.value, nh.value, 2.0 * deficit));
  report.checks.push_back(Check::flag("norm_h_truncation_note", nh.truncated));
  report.checks.push_back(Check::flag("identity_f_plus_k_is_2g", add(w.f, w.k) == scale(w.g, 2.0)));
  report.checks.push_back(Check::flag("identity_f_minus_k_is_2h", subtract(w.f, w.k) == scale(w.h, 2.0)));

  const PairNorms pn = pair_norms(w.f, w.k, evaluator, true);
  report.checks.push_back(
      Check::relative("zbaganu_product_is_4_norm_g_norm_h", 4.0 * ng.value * nh.value, pn.sum * pn.diff, 1e-9));

  ojson ratios = ojson::array();
  for (const ConstantKind& kind : config.kind_list()) {
    const double value = ratio_from_norms(kind, pn);
    ratios.push_back({{"kind", kind.name()}, {"s", kind.s}, {"ratio", value}});
    report.checks.push_back(
        Check::range("ratio_" + kind.label(), 2.0, value, 2.0 - kTheorem1RatioWindow, 2.0 + kRatioUpperSlack));
  }
  report.results["ratios"] = ratios;
  detail::finish_report(report, config, started);
  return report;
}

/// Absolute slack on small-Morrey witness quantities coming from stopping the
/// radius search at r_max < 1 instead of the limit r -> 1-.
inline double small_morrey_truncation_slack(const RunConfig& config) {
  const double r_max = config.search.resolved_r_max(Mode::SmallMorrey);
  return 2.0 * config.space.n * (1.0 - r_max) / config.space.p + 10.0 * config.integ.rel_tol;
}

inline constexpr double kTheorem2BoundSlack = 1e-3;
inline constexpr double kTheorem2FinalWindow = 0.02;
inline constexpr double kTheorem2FinalEpsilon = 1e-4;

inline Report cmd_verify_theorem2(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  const SpaceParams params = detail::strict_params(config, Mode::SmallMorrey, "verify-thm2");
  RunConfig small_config = config;
  small_config.space.mode = Mode::SmallMorrey;
  Report report = detail::start_report("verify-thm2", small_config);
  NormEvaluator evaluator(params, config.search, config.integ);
  const double closed = closed_form_power_norm(params);
  const double slack = small_morrey_truncation_slack(small_config);
  const std::vector<ConstantKind> kinds = config.kind_list();
  report.results["closed_form_norm"] = closed;
  report.results["truncation_slack"] = slack;

  std::vector<std::vector<double>> ratio_rows;  // [eps index][kind index]
  ojson per_eps = ojson::array();
  bool closed_checked = false;
  for (double eps : config.epsilon_ladder) {
    const WitnessFamily w = witness_family_small_morrey(params, eps);
    const std::string tag = "eps=" + format_number(eps) + ":";
    const NormResult nf = evaluator.evaluate(w.f);
    const NormResult ng = evaluator.evaluate(w.g);
    const NormResult nh = evaluator.evaluate(w.h);
    const NormResult nk = evaluator.evaluate(w.k);
    if (!closed_checked) {
      report.checks.push_back(Check::relative("norm_f_closed_form", closed, nf.value, 1e-3));
      closed_checked = true;
    }
    report.checks.push_back(Check::relative(tag + "norm_g_equals_norm_f", nf.value, ng.value, 1e-3));
    report.checks.push_back(Check::relative(tag + "norm_k_equals_norm_f", nf.value, nk.value, 1e-3));
    const double h_bound =
        nf.value * std::pow(1.0 - std::pow(eps, params.n * (1.0 - params.p / params.q)), 1.0 / params.p);
    report.checks.push_back(Check::at_least(tag + "norm_h_lower_bound", h_bound, nh.value, 1e-3 * nf.value));

    const PairNorms pn = pair_norms(w.f, w.k, evaluator, true);
    report.checks.push_back(Check::relative(tag + "zbaganu_product_is_4_norm_g_norm_h", 4.0 * ng.value * nh.value,
                                            pn.sum * pn.diff, 1e-9));
    ojson row;
    row["eps"] = eps;
    row["norms"] = {{"f", norm_json(nf)}, {"g", norm_json(ng)}, {"h", norm_json(nh)}, {"k", norm_json(nk)}};
    ojson ratios = ojson::array();
    std::vector<double> values;
    for (const ConstantKind& kind : kinds) {
      const double value = ratio_from_norms(kind, pn);
      const double bound = theorem2_lower_bound(params, eps, kind);
      values.push_back(value);
      ratios.push_back({{"kind", kind.name()}, {"s", kind.s}, {"ratio", value}, {"lower_bound", bound}});
      report.checks.push_back(
          Check::range(tag + "ratio_" + kind.label(), bound, value, bound - kTheorem2BoundSlack, 2.0 + kRatioUpperSlack));
    }
    row["ratios"] = ratios;
    per_eps.push_back(row);
    ratio_rows.push_back(std::move(values));
  }
  report.results["per_eps"] = per_eps;

  // Ratios must not decrease as epsilon shrinks along the ladder.
  for (std::size_t e = 0; e + 1 < config.epsilon_ladder.size(); ++e) {
    if (!(config.epsilon_ladder[e + 1] < config.epsilon_ladder[e])) continue;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      report.checks.push_back(Check::at_least("monotone_" + kinds[k].label() + "_eps=" +
                                                  format_number(config.epsilon_ladder[e + 1]),
                                              ratio_rows[e][k], ratio_rows[e + 1][k], kRatioUpperSlack));
    }
  }

  // Proximity to 2 at the final epsilon once it reaches 1e-4. For the witness
  // family the s-power kinds sit near 1 + (1 - eps^{n(1-p/q)})^{s/p}, so large
  // s can land outside the window; that is reported, not hidden.
  const std::size_t last = config.epsilon_ladder.size() - 1;
  const double eps_last = config.epsilon_ladder[last];
  if (eps_last <= kTheorem2FinalEpsilon) {
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      report.checks.push_back(Check::range("final_eps_near_2_" + kinds[k].label(), 2.0, ratio_rows[last][k],
                                           2.0 - kTheorem2FinalWindow - slack, 2.0 + kRatioUpperSlack));
    }
  }
  detail::finish_report(report, config, started);
  return report;
}

inline ojson estimate_json(const ConstantEstimate& est) {
  ojson j;
  j["kind"] = est.kind.name();
  j["s"] = est.kind.s;
  j["best_ratio"] = est.best_ratio;
  j["best_label"] = est.best_label;
  j["witness"] = {{"x", pieces_json(est.witness_x)}, {"y", pieces_json(est.witness_y)}};
  j["pairs_tried"] = est.n_pairs_tried;
  j["pairs_skipped"] = est.n_skipped;
  return j;
}

/// Estimates every requested constant over witnesses, the trivial pair and
/// config.random_trials random pairs.
inline Report cmd_constants(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  Report report = detail::start_report("constants", config);
  const SpaceParams params = SpaceParams::make(config.space.n, config.space.p, config.space.q, config.space.mode);
  NormEvaluator evaluator(params, config.search, config.integ);
  EstimateOptions options;
  options.random_trials = config.random_trials;
  options.seed = config.seed;
  options.epsilon_ladder = config.epsilon_ladder;
  const std::vector<CandidatePair> pairs = build_candidates(params, options);
  const auto evals = evaluate_pairs(pairs, evaluator, true);
  const double upper = 2.0 + 5.0 * config.integ.rel_tol;
  ojson estimates = ojson::array();
  for (const ConstantKind& kind : config.kind_list()) {
    const ConstantEstimate est = reduce_estimate(kind, pairs, evals);
    estimates.push_back(estimate_json(est));
    report.checks.push_back(Check::at_most("upper_bound_" + kind.label(), 2.0, est.best_ratio, upper - 2.0));
    if (params.p < params.q) {
      const double target = params.mode == Mode::Morrey
                                ? 2.0 - kTheorem1RatioWindow
                                : theorem2_lower_bound(params, *std::min_element(config.epsilon_ladder.begin(),
                                                                                 config.epsilon_ladder.end()),
                                                       kind) - kTheorem2BoundSlack;
      report.checks.push_back(Check::at_least("witness_lower_bound_" + kind.label(), target, est.best_ratio, 0.0));
    }
  }
  report.results["estimates"] = estimates;
  detail::finish_report(report, config, started);
  return report;
}

/// Random sweep: max ratio, violations above 2 + 5 rel_tol, and top-5 pairs per kind.
inline Report cmd_search(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  if (config.random_trials < 1) throw Error(ErrorCode::InvalidArgument, "search requires --trials >= 1");
  Report report = detail::start_report("search", config);
  const SpaceParams params = SpaceParams::make(config.space.n, config.space.p, config.space.q, config.space.mode);
  NormEvaluator evaluator(params, config.search, config.integ);
  EstimateOptions options;
  options.random_trials = config.random_trials;
  options.seed = config.seed;
  options.epsilon_ladder = config.epsilon_ladder;
  const std::vector<CandidatePair> pairs = build_candidates(params, options);
  const auto evals = evaluate_pairs(pairs, evaluator, true);
  const double upper = 2.0 + 5.0 * config.integ.rel_tol;
  const double domination_tol = 10.0 * config.integ.rel_tol;

  int evaluated = 0;
  int domination_violations = 0;
  for (const PairEvaluation& e : evals) {
    if (!e.norms) continue;
    ++evaluated;
    const double zb = ratio_from_norms(ConstantKind::zbaganu(), *e.norms);
    const double vnj = ratio_from_norms(ConstantKind::gen_vnj(2.0), *e.norms);
    if (zb > vnj + domination_tol) ++domination_violations;
  }

  ojson kinds = ojson::array();
  for (const ConstantKind& kind : config.kind_list()) {
    const ConstantEstimate est = reduce_estimate(kind, pairs, evals);
    std::vector<std::size_t> order;
    int violations = 0;
    for (std::size_t i = 0; i < est.trace.size(); ++i) {
      if (est.trace[i].skipped) continue;
      order.push_back(i);
      if (est.trace[i].ratio > upper) ++violations;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return est.trace[a].ratio > est.trace[b].ratio; });
    ojson top = ojson::array();
    for (std::size_t t = 0; t < std::min<std::size_t>(5, order.size()); ++t) {
      const std::size_t i = order[t];
      top.push_back({{"label", pairs[i].label},
                     {"ratio", est.trace[i].ratio},
                     {"x", pieces_json(pairs[i].x)},
                     {"y", pieces_json(pairs[i].y)}});
    }
    ojson entry = estimate_json(est);
    entry["max_ratio"] = est.best_ratio;
    entry["violations"] = violations;
    entry["top"] = top;
    kinds.push_back(entry);
    report.checks.push_back(Check::at_most("violations_" + kind.label(), 0.0, violations, 0.0));
  }
  report.results["pairs_evaluated"] = evaluated;
  report.results["pairs_skipped"] = static_cast<int>(pairs.size()) - evaluated;
  report.results["zbaganu_over_gen_vnj2_violations"] = domination_violations;
  report.results["kinds"] = kinds;
  report.checks.push_back(Check::at_most("zbaganu_le_gen_vnj2", 0.0, domination_violations, 0.0));
  detail::finish_report(report, config, started);
  return report;
}

}  // namespace morrey

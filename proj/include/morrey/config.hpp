#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "morrey/ball_integration.hpp"
#include "morrey/constants_engine.hpp"
#include "morrey/core_model.hpp"
#include "morrey/error.hpp"
#include "morrey/norm_engine.hpp"

namespace morrey {

enum class OutputFormat { Json, Csv };

/// Everything a CLI run needs. Thread count and timing are deliberately not
/// part of the echoed configuration: they must not change report bytes.
struct RunConfig {
  SpaceParams space{};
  std::vector<double> s_values{1.0, 2.0};
  std::vector<double> epsilon_ladder = default_epsilon_ladder();
  std::vector<std::string> kinds{"gen_vnj", "mod_vnj", "gen_mod_vnj", "zbaganu"};
  SearchSettings search{};
  IntegrationSettings integ{};
  int random_trials = 0;
  std::uint64_t seed = 1;
  std::string function_spec;
  std::string output_path;
  OutputFormat format = OutputFormat::Json;
  bool timing = false;
  int threads = 1;

  void validate() const {
    SpaceParams::make(space.n, space.p, space.q, space.mode);
    if (s_values.empty()) throw Error(ErrorCode::InvalidArgument, "at least one --s value is required");
    for (double s : s_values)
      if (!(s >= 1.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "every s must satisfy 1 <= s < inf");
    if (epsilon_ladder.empty()) throw Error(ErrorCode::InvalidArgument, "epsilon ladder must be nonempty");
    for (double eps : epsilon_ladder)
      if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "every epsilon must lie in (0,1)");
    if (random_trials < 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 0");
    search.validate(space.mode);
    integ.validate();
    kind_list();
  }

  /// Expands `kinds` x `s_values` into concrete constant kinds.
  std::vector<ConstantKind> kind_list() const {
    std::vector<ConstantKind> out;
    for (const std::string& name : kinds) {
      if (name == "gen_vnj") {
        for (double s : s_values) out.push_back(ConstantKind::gen_vnj(s));
      } else if (name == "mod_vnj") {
        out.push_back(ConstantKind::mod_vnj());
      } else if (name == "gen_mod_vnj") {
        for (double s : s_values) out.push_back(ConstantKind::gen_mod_vnj(s));
      } else if (name == "zbaganu") {
        out.push_back(ConstantKind::zbaganu());
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown constant kind '" + name + "'");
      }
    }
    return out;
  }

  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    j["n"] = space.n;
    j["p"] = space.p;
    j["q"] = space.q;
    j["mode"] = to_string(space.mode);
    j["s"] = s_values;
    j["eps"] = epsilon_ladder;
    j["kinds"] = kinds;
    j["r_min"] = search.r_min;
    j["r_max"] = search.resolved_r_max(space.mode);
    j["d_max"] = search.d_max ? nlohmann::ordered_json(*search.d_max) : nlohmann::ordered_json("auto");
    j["r_grid"] = search.r_grid;
    j["d_grid"] = search.d_grid;
    j["golden_steps"] = search.golden_steps;
    j["multistarts"] = search.multistarts;
    j["sweeps"] = search.sweeps;
    j["polish_evals"] = search.polish_evals;
    j["rel_tol"] = integ.rel_tol;
    j["max_subdivisions"] = integ.max_subdivisions;
    j["mc_samples"] = integ.mc_samples;
    j["trials"] = random_trials;
    j["seed"] = seed;
    return j;
  }
};

inline Mode parse_mode(const std::string& text) {
  if (text == "morrey") return Mode::Morrey;
  if (text == "small") return Mode::SmallMorrey;
  throw Error(ErrorCode::InvalidArgument, "mode must be 'morrey' or 'small', got '" + text + "'");
}

inline OutputFormat parse_format(const std::string& text) {
  if (text == "json") return OutputFormat::Json;
  if (text == "csv") return OutputFormat::Csv;
  throw Error(ErrorCode::InvalidArgument, "format must be 'json' or 'csv', got '" + text + "'");
}

/// Applies a JSON config object whose keys mirror the CLI flag names.
inline void apply_config_json(RunConfig& config, const nlohmann::json& j) {
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n") config.space.n = value.get<int>();
      else if (key == "p") config.space.p = value.get<double>();
      else if (key == "q") config.space.q = value.get<double>();
      else if (key == "mode") config.space.mode = parse_mode(value.get<std::string>());
      else if (key == "s") config.s_values = value.get<std::vector<double>>();
      else if (key == "eps") config.epsilon_ladder = value.get<std::vector<double>>();
      else if (key == "kind") config.kinds = value.get<std::vector<std::string>>();
      else if (key == "rel-tol" || key == "rel_tol") config.integ.rel_tol = value.get<double>();
      else if (key == "r-max" || key == "r_max") config.search.r_max = value.get<double>();
      else if (key == "d-max" || key == "d_max") config.search.d_max = value.get<double>();
      else if (key == "mc-samples" || key == "mc_samples") config.integ.mc_samples = value.get<std::int64_t>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "trials") config.random_trials = value.get<int>();
      else if (key == "out") config.output_path = value.get<std::string>();
      else if (key == "format") config.format = parse_format(value.get<std::string>());
      else if (key == "function") config.function_spec = value.get<std::string>();
      else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config file: ") + e.what());
  }
  config.integ.rng_seed = config.seed;
}

inline void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "config file '" + path + "': " + e.what());
  }
  apply_config_json(config, j);
}

}  // namespace morrey

// morrey: norms in Morrey / small Morrey spaces and geometric-constant checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "morrey/morrey.hpp"

namespace {

struct FlagValues {
  int n = 1;
  double p = 1.0;
  double q = 2.0;
  std::string mode = "morrey";
  std::vector<double> s;
  std::vector<double> eps;
  std::vector<std::string> kind;
  double rel_tol = 1e-10;
  double r_max = 0.0;
  double d_max = 0.0;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 1;
  int trials = 0;
  std::string out;
  std::string format = "json";
  std::string function;
  std::string config_file;
  int threads = 1;
  bool timing = false;
};

struct Options {
  std::map<std::string, CLI::Option*> by_name;
};

Options add_common_flags(CLI::App* sub, FlagValues& v) {
  Options o;
  o.by_name["config"] = sub->add_option("--config", v.config_file, "JSON config file; flags override it");
  o.by_name["n"] = sub->add_option("--n", v.n, "dimension");
  o.by_name["p"] = sub->add_option("--p", v.p, "integrability exponent p >= 1");
  o.by_name["q"] = sub->add_option("--q", v.q, "scaling exponent q >= p");
  o.by_name["mode"] = sub->add_option("--mode", v.mode, "morrey | small")->check(CLI::IsMember({"morrey", "small"}));
  o.by_name["s"] = sub->add_option("--s", v.s, "parameter s >= 1 (repeatable)")->take_all();
  o.by_name["eps"] = sub->add_option("--eps", v.eps, "epsilon ladder values in (0,1) (repeatable)")->take_all();
  o.by_name["kind"] = sub->add_option("--kind", v.kind, "gen_vnj | mod_vnj | gen_mod_vnj | zbaganu (repeatable)")
                          ->take_all();
  o.by_name["rel-tol"] = sub->add_option("--rel-tol", v.rel_tol, "quadrature relative tolerance");
  o.by_name["r-max"] = sub->add_option("--r-max", v.r_max, "largest radius searched");
  o.by_name["d-max"] = sub->add_option("--d-max", v.d_max, "largest center distance searched");
  o.by_name["mc-samples"] = sub->add_option("--mc-samples", v.mc_samples, "Monte Carlo samples");
  o.by_name["seed"] = sub->add_option("--seed", v.seed, "random seed");
  o.by_name["trials"] = sub->add_option("--trials", v.trials, "random candidate pairs");
  o.by_name["out"] = sub->add_option("--out", v.out, "output file (default stdout)");
  o.by_name["format"] = sub->add_option("--format", v.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  o.by_name["function"] = sub->add_option("--function", v.function, "pieces \"lo hi coef alpha; ...\"");
  o.by_name["threads"] = sub->add_option("--threads", v.threads, "worker threads (0 = all cores)");
  o.by_name["timing"] = sub->add_flag("--timing", v.timing, "include wall time in the report");
  return o;
}

morrey::RunConfig build_config(const Options& o, const FlagValues& v) {
  morrey::RunConfig config;
  auto set = [&](const char* name) { return o.by_name.at(name)->count() > 0; };
  if (set("config")) morrey::load_config_file(config, v.config_file);
  if (set("n")) config.space.n = v.n;
  if (set("p")) config.space.p = v.p;
  if (set("q")) config.space.q = v.q;
  if (set("mode")) config.space.mode = morrey::parse_mode(v.mode);
  if (set("s")) config.s_values = v.s;
  if (set("eps")) config.epsilon_ladder = v.eps;
  if (set("kind")) config.kinds = v.kind;
  if (set("rel-tol")) config.integ.rel_tol = v.rel_tol;
  if (set("r-max")) config.search.r_max = v.r_max;
  if (set("d-max")) config.search.d_max = v.d_max;
  if (set("mc-samples")) config.integ.mc_samples = v.mc_samples;
  if (set("seed")) config.seed = v.seed;
  if (set("trials")) config.random_trials = v.trials;
  if (set("out")) config.output_path = v.out;
  if (set("format")) config.format = morrey::parse_format(v.format);
  if (set("function")) config.function_spec = v.function;
  config.integ.rng_seed = config.seed;
  config.threads = v.threads;
  config.timing = v.timing;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morrey and small Morrey norms; von Neumann-Jordan type constants"};
  app.require_subcommand(1);
  app.set_version_flag("--version", morrey::kToolVersion);

  struct Sub {
    const char* name;
    const char* help;
    morrey::Report (*run)(const morrey::RunConfig&);
  };
  const std::vector<Sub> subs = {
      {"norm", "norm of a piecewise radial power function", morrey::cmd_norm},
      {"verify-thm1", "witness check of the Morrey-space constants", morrey::cmd_verify_theorem1},
      {"verify-thm2", "witness check of the small Morrey-space constants", morrey::cmd_verify_theorem2},
      {"constants", "estimate the four constants", morrey::cmd_constants},
      {"search", "random sweep for ratios above 2", morrey::cmd_search},
  };
  std::vector<FlagValues> values(subs.size());
  std::vector<Options> options;
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* sub = app.add_subcommand(subs[i].name, subs[i].help);
    options.push_back(add_common_flags(sub, values[i]));
    apps.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    try {
      const morrey::RunConfig config = build_config(options[i], values[i]);
      morrey::set_thread_count(config.threads);
      const morrey::Report report = subs[i].run(config);
      const std::string text = morrey::render(report, config.format);
      if (config.output_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(config.output_path, std::ios::binary);
        if (!out) {
          std::cerr << "error: cannot write '" << config.output_path << "'\n";
          return 2;
        }
        out << text;
      }
      for (const morrey::Check& c : report.checks) {
        if (!c.pass)
          std::cerr << "FAIL " << c.name << ": expected " << morrey::format_number(c.expected) << ", computed "
                    << morrey::format_number(c.computed) << ", tolerance " << morrey::format_number(c.tolerance)
                    << "\n";
      }
      return report.all_pass() ? 0 : 1;
    } catch (const morrey::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}

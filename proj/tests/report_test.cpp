#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "morrey/morrey.hpp"

using namespace morrey;

namespace {

RunConfig base_config() {
  RunConfig c;
  c.space = SpaceParams::make(1, 1.0, 2.0, Mode::Morrey);
  return c;
}

std::map<std::string, std::string> csv_rows(const std::string& text) {
  std::map<std::string, std::string> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "path,value");
  while (std::getline(in, line)) {
    // Paths never contain commas, so the first comma splits the row.
    const auto comma = line.find(',');
    std::string value = line.substr(comma + 1);
    if (value.size() >= 2 && value.front() == '"') value = value.substr(1, value.size() - 2);
    rows[line.substr(0, comma)] = value;
  }
  return rows;
}

}  // namespace

TEST(Check, Constructors) {
  EXPECT_TRUE(Check::relative("a", 2.0, 2.001, 1e-3).pass);
  EXPECT_FALSE(Check::relative("a", 2.0, 2.003, 1e-3).pass);
  EXPECT_TRUE(Check::at_least("b", 1.81, 1.8095, 1e-3).pass);
  EXPECT_FALSE(Check::at_most("c", 0.0, 1.0, 0.0).pass);
  EXPECT_FALSE(Check::flag("d", false).pass);
}

TEST(CmdNorm, PurePower) {
  RunConfig c = base_config();
  c.function_spec = "0 inf 1 -0.5";
  const Report r = cmd_norm(c);
  EXPECT_NEAR(r.results["norm"]["value"].get<double>(), 2.82843, 1e-5);
  EXPECT_FALSE(r.results["norm"]["infinite"].get<bool>());
}

TEST(CmdNorm, InfiniteAndEmpty) {
  RunConfig c = base_config();
  c.function_spec = "0 inf 1 -1";
  const Report inf = cmd_norm(c);
  EXPECT_TRUE(inf.results["norm"]["infinite"].get<bool>());
  EXPECT_NE(to_json_text(inf).find("\"inf\""), std::string::npos);
  c.function_spec = "";
  EXPECT_EQ(cmd_norm(c).results["norm"]["value"].get<double>(), 0.0);
}

TEST(CmdNorm, ParseErrorsSurface) {
  RunConfig c = base_config();
  c.function_spec = "0 1 x 2";
  EXPECT_THROW(cmd_norm(c), Error);
}

TEST(Emission, CsvMatchesJsonNumbers) {
  RunConfig c = base_config();
  c.s_values = {1.0, 3.0};
  const Report r = cmd_verify_theorem1(c);
  const auto json = nlohmann::json::parse(to_json_text(r));
  const auto rows = csv_rows(to_csv_text(r));
  const auto flat = json.flatten();  // JSON-pointer keys
  std::size_t compared = 0;
  std::vector<std::pair<std::string, std::string>> expected_rows;
  detail::flatten(r.to_json(), "", expected_rows);
  ASSERT_EQ(rows.size(), expected_rows.size());
  for (const auto& [path, value] : expected_rows) {
    ASSERT_TRUE(rows.count(path)) << path;
    char* end = nullptr;
    const double csv_value = std::strtod(rows.at(path).c_str(), &end);
    if (end == rows.at(path).c_str() || *end != '\0') continue;  // non-numeric leaf
    const double ref = std::strtod(value.c_str(), nullptr);
    EXPECT_EQ(std::stod(format_number(csv_value)), ref) << path;
    char a[64], b[64];
    std::snprintf(a, sizeof a, "%.15g", csv_value);
    std::snprintf(b, sizeof b, "%.15g", ref);
    EXPECT_STREQ(a, b) << path;
    ++compared;
  }
  EXPECT_GT(compared, 20u);
  EXPECT_GT(flat.size(), 20u);
}

TEST(Emission, JsonParsesBackToSameNumbers) {
  RunConfig c = base_config();
  c.function_spec = "0 1 1 -0.5; 1 inf -1 -0.5";
  const Report r = cmd_norm(c);
  const auto parsed = nlohmann::json::parse(to_json_text(r));
  EXPECT_EQ(parsed["results"]["norm"]["value"].get<double>(), r.results["norm"]["value"].get<double>());
  EXPECT_EQ(parsed["results"]["norm"]["argmax_r"].get<double>(), r.results["norm"]["argmax_r"].get<double>());
}

TEST(Emission, WallTimeOnlyWhenRequested) {
  RunConfig c = base_config();
  c.function_spec = "0 inf 1 -0.5";
  EXPECT_EQ(to_json_text(cmd_norm(c)).find("wall_time"), std::string::npos);
  c.timing = true;
  EXPECT_NE(to_json_text(cmd_norm(c)).find("wall_time"), std::string::npos);
}

TEST(Determinism, ThreadCountDoesNotChangeBytes) {
  RunConfig c = base_config();
  c.random_trials = 12;
  c.seed = 99;
  c.search.r_grid = 24;
  c.search.d_grid = 13;
  set_thread_count(1);
  const std::string one = to_json_text(cmd_search(c));
  set_thread_count(3);
  const std::string three = to_json_text(cmd_search(c));
  set_thread_count(1);
  EXPECT_EQ(one, three);
}

TEST(Config, FileValuesAndOverrides) {
  const auto path = std::filesystem::temp_directory_path() / "morrey_report_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"n": 2, "p": 1.5, "q": 3, "mode": "small", "s": [1, 2.5], "eps": [0.3], "rel_tol": 1e-8,
               "r-max": 0.9, "seed": 5, "trials": 4, "format": "csv", "kind": ["zbaganu"]})";
  }
  RunConfig c;
  load_config_file(c, path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(c.space.n, 2);
  EXPECT_EQ(c.space.p, 1.5);
  EXPECT_EQ(c.space.mode, Mode::SmallMorrey);
  EXPECT_EQ(c.s_values, (std::vector<double>{1.0, 2.5}));
  EXPECT_EQ(c.integ.rel_tol, 1e-8);
  EXPECT_EQ(*c.search.r_max, 0.9);
  EXPECT_EQ(c.integ.rng_seed, 5u);
  EXPECT_EQ(c.format, OutputFormat::Csv);
  EXPECT_NO_THROW(c.validate());
  ASSERT_EQ(c.kind_list().size(), 1u);
  EXPECT_EQ(c.kind_list()[0].label(), "zbaganu");
  // A later override wins.
  apply_config_json(c, nlohmann::json::parse(R"({"n": 3})"));
  EXPECT_EQ(c.space.n, 3);
}

TEST(Config, RejectsBadInput) {
  RunConfig c;
  EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"bogus": 1})")), Error);
  EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"n": "two"})")), Error);
  EXPECT_THROW(load_config_file(c, "/nonexistent/morrey.json"), Error);
  RunConfig bad = base_config();
  bad.epsilon_ladder = {1.5};
  EXPECT_THROW(bad.validate(), Error);
  bad = base_config();
  bad.kinds = {"james"};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Verify, RejectsPEqualsQ) {
  RunConfig c = base_config();
  c.space.p = 2.0;
  c.space.q = 2.0;
  EXPECT_THROW(cmd_verify_theorem1(c), Error);
  EXPECT_THROW(cmd_verify_theorem2(c), Error);
}

TEST(Verify, Theorem1Passes) {
  RunConfig c = base_config();
  c.s_values = {1.0, 1.5, 2.0, 3.0};
  const Report r = cmd_verify_theorem1(c);
  for (const Check& check : r.checks) EXPECT_TRUE(check.pass) << check.name << " computed " << check.computed;
}

TEST(Verify, Theorem2LadderPasses) {
  RunConfig c = base_config();
  c.s_values = {1.0, 2.0, 3.0};
  c.epsilon_ladder = {0.5, 0.1, 0.01};
  const Report r = cmd_verify_theorem2(c);
  for (const Check& check : r.checks) EXPECT_TRUE(check.pass) << check.name << " computed " << check.computed;
}

TEST(Constants, MorreyEstimatesPass) {
  RunConfig c = base_config();
  c.random_trials = 5;
  const Report r = cmd_constants(c);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.results["estimates"].size(), 6u);
}

TEST(Search, RequiresTrials) {
  RunConfig c = base_config();
  EXPECT_THROW(cmd_search(c), Error);
}

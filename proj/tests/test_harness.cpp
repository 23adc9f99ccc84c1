#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "apit/harness.hpp"

using namespace apit;
using nlohmann::json;

namespace {

json base_config() {
  return {{"name", "t"},
          {"seed", 7},
          {"replicates", 10},
          {"sample_sizes", {20}},
          {"alphas", {0.1, 0.05}},
          {"pycke_reps", 1000},
          {"permutations", 99},
          {"scenarios", {{{"kind", "gaussian_copula"}, {"rho", 0.5}}}}};
}

std::string config_error_path(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

std::string csv_of(const PowerStudyResult& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = config_from_json({{"sample_sizes", {50}}, {"scenarios", json::array()}});
  EXPECT_EQ(cfg.replicates, 100u);
  EXPECT_EQ(cfg.pycke_reps, 2000u);
  EXPECT_EQ(cfg.permutations, 200u);
  EXPECT_EQ(cfg.tests.size(), 4u);
  EXPECT_EQ(cfg.alphas, (std::vector<double>{0.10, 0.05, 0.01}));
}

TEST(Config, ParamArraysExpand) {
  auto j = base_config();
  j["scenarios"] = {{{"kind", "jw_circ_lin"}, {"c0", {0.7, 0.8, 1.0}}, {"linear_margin", "cauchy:0,1"}}};
  const auto cfg = config_from_json(j);
  ASSERT_EQ(cfg.scenarios.size(), 3u);
  EXPECT_EQ(cfg.scenarios[1].param, 0.8);
  EXPECT_EQ(cfg.scenarios[0].id, "jw_circ_lin/cauchy:0;1");
  EXPECT_EQ(cfg.scenarios[0].linear_margin, LinearMarginal(Cauchy{0.0, 1.0}));
  EXPECT_EQ(cfg.scenarios[0].sign, Sign::difference);
  EXPECT_EQ(cfg.scenarios[0].direction, Direction::difference);
}

TEST(Config, SignAndDirection) {
  auto j = base_config();
  j["scenarios"] = {{{"kind", "gaussian_copula"}, {"rho", -0.5}, {"sign", "sum"}},
                    {{"kind", "frank_copula"}, {"phi", 2.0}, {"direction", "auto"}}};
  const auto cfg = config_from_json(j);
  EXPECT_EQ(cfg.scenarios[0].sign, Sign::sum);
  EXPECT_EQ(cfg.scenarios[0].direction, Direction::sum);
  EXPECT_EQ(cfg.scenarios[1].direction, Direction::automatic);
}

TEST(Config, ExplicitNntsCoefficients) {
  auto j = base_config();
  j["scenarios"] = {{{"kind", "jw_circ_circ"},
                     {"c0", 0.8},
                     {"circular_margins", {{{"M", 1}, {"c", {{0.6, 0.0}, {0.0, 0.8}}}}, {{"M", 2}, {"c0", 0.9}, {"seed", 3}}}}}};
  const auto cfg = config_from_json(j);
  EXPECT_NEAR(cfg.scenarios[0].circular_margin.coefficients()[1].imag(), 0.8, 1e-12);
  EXPECT_EQ(cfg.scenarios[0].second_circular_margin.degree(), 2u);
}

TEST(Config, ErrorsCarryFieldPaths) {
  auto j = base_config();
  j["replicates"] = 0;
  EXPECT_EQ(config_error_path(j), "replicates");
  j = base_config();
  j["alphas"] = {0.05, 1.0};
  EXPECT_EQ(config_error_path(j), "alphas[1]");
  j = base_config();
  j["sample_sizes"] = {20, 4};
  EXPECT_EQ(config_error_path(j), "sample_sizes[1]");
  j = base_config();
  j["scenarios"] = {{{"kind", "gaussian_copula"}, {"rho", 0.1}}, {{"kind", "gaussian_copula"}, {"rho", 1.0}}};
  EXPECT_EQ(config_error_path(j), "scenarios[1].rho");
  j = base_config();
  j["scenarios"] = {{{"kind", "nope"}}};
  EXPECT_EQ(config_error_path(j), "scenarios[0].kind");
  j = base_config();
  j["scenarios"] = {{{"kind", "frank_copula"}, {"phi", 1.0}, {"margins", {"normal:0,1", "weibull:1"}}}};
  EXPECT_EQ(config_error_path(j), "scenarios[0].margins[1]");
  j = base_config();
  j["tests"] = {"wilks", "kendall"};
  EXPECT_EQ(config_error_path(j), "tests[1]");
  j = base_config();
  j["pycke_reps"] = 10;
  EXPECT_EQ(config_error_path(j), "pycke_reps");
  j = base_config();
  j["scenarios"] = {{{"kind", "jw_circ_lin"}}};
  EXPECT_EQ(config_error_path(j), "scenarios[0].c0");
  j = base_config();
  j.erase("sample_sizes");
  EXPECT_EQ(config_error_path(j), "sample_sizes");
  j = base_config();
  j["scenarios"] = {{{"kind", "gaussian_copula"}, {"rho", 0.1}, {"id", "a,b"}}};
  EXPECT_EQ(config_error_path(j), "scenarios[0].id");
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "apit_cfg_test.json";
  {
    std::ofstream(path) << base_config().dump();
  }
  EXPECT_EQ(load_config(path).seed, 7u);
  {
    std::ofstream(path) << "{ not json";
  }
  EXPECT_THROW(load_config(path), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(Config, SeedEnvironmentOverride) {
  ::unsetenv(kSeedEnvVar);
  EXPECT_FALSE(seed_from_environment().has_value());
  ::setenv(kSeedEnvVar, "12345", 1);
  EXPECT_EQ(seed_from_environment(), 12345u);
  ::setenv(kSeedEnvVar, "12x", 1);
  EXPECT_THROW(seed_from_environment(), ConfigError);
  ::unsetenv(kSeedEnvVar);
}

TEST(PowerStudy, CardinalityAndOrder) {
  auto j = base_config();
  j["sample_sizes"] = {20, 30};
  j["tests"] = {"wilks", "apit_rayleigh"};
  const auto r = run_power_study(config_from_json(j), {1, nullptr});
  ASSERT_EQ(r.records.size(), 2u * 2u * 2u);
  EXPECT_EQ(r.records[0].n, 20u);
  EXPECT_EQ(r.records[0].alpha, 0.1);
  EXPECT_EQ(r.records[0].test, StudyTest::wilks);
  EXPECT_EQ(r.records[1].test, StudyTest::apit_rayleigh);
  EXPECT_EQ(r.records[2].alpha, 0.05);
  EXPECT_EQ(r.records[4].n, 30u);
  for (const auto& rec : r.records) {
    EXPECT_LE(rec.rejections, rec.replicates);
    EXPECT_EQ(rec.replicates, 10u);
    EXPECT_GE(rec.mean_lambda, 0.0);
    EXPECT_LE(rec.mean_lambda, 1.0);
  }
  EXPECT_EQ(r.seed, 7u);
  EXPECT_EQ(r.version, kVersion);
}

TEST(PowerStudy, EmptyGridGivesHeaderOnlyCsv) {
  auto j = base_config();
  j["scenarios"] = json::array();
  const auto r = run_power_study(config_from_json(j));
  EXPECT_TRUE(r.records.empty());
  const std::string csv = csv_of(r);
  EXPECT_EQ(csv.substr(csv.rfind("scenario,")), std::string(kPowerCsvHeader) + "\n");
}

TEST(PowerStudy, DeterministicAcrossThreadCounts) {
  auto j = base_config();
  j["scenarios"] = {{{"kind", "jw_circ_circ"}, {"c0", 0.8}},
                    {{"kind", "frank_copula"}, {"phi", 5.0}, {"margins", {"cauchy:0,1", "exponential:2"}}}};
  const auto cfg = config_from_json(j);
  const auto a = csv_of(run_power_study(cfg, {1, nullptr}));
  const auto b = csv_of(run_power_study(cfg, {8, nullptr}));
  const auto c = csv_of(run_power_study(cfg, {3, nullptr}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(PowerStudy, ScenarioStreamsIndependentOfListPosition) {
  auto j = base_config();
  j["tests"] = {"wilks"};
  j["scenarios"] = {{{"id", "g"}, {"kind", "gaussian_copula"}, {"rho", 0.3}}};
  const auto alone = run_power_study(config_from_json(j));
  j["scenarios"] = {{{"id", "f"}, {"kind", "frank_copula"}, {"phi", 3.0}},
                    {{"id", "g"}, {"kind", "gaussian_copula"}, {"rho", 0.3}}};
  const auto both = run_power_study(config_from_json(j));
  EXPECT_EQ(*alone.find("g", 0.3, 20, 0.05, StudyTest::wilks), *both.find("g", 0.3, 20, 0.05, StudyTest::wilks));
}

TEST(PowerStudy, SeedChangesOutput) {
  auto j = base_config();
  j["replicates"] = 30;
  const auto a = csv_of(run_power_study(config_from_json(j)));
  j["seed"] = 8;
  const auto b = csv_of(run_power_study(config_from_json(j)));
  EXPECT_NE(a, b);
}

TEST(PowerStudy, CsvAndJsonRoundTrip) {
  auto j = base_config();
  j["scenarios"] = {{{"kind", "jw_circ_lin"}, {"c0", {0.7, 0.99}}}};
  const auto r = run_power_study(config_from_json(j));
  std::istringstream in(csv_of(r));
  EXPECT_EQ(read_csv(in), r);
  EXPECT_EQ(power_result_from_json(json::parse(to_json(r).dump())), r);
}

TEST(PowerStudy, EmitTableWritesFilesAndReportsPath) {
  auto j = base_config();
  const auto r = run_power_study(config_from_json(j));
  const auto dir = std::filesystem::temp_directory_path();
  emit_table(r, TableFormat::csv, dir / "apit_emit.csv");
  emit_table(r, TableFormat::json, dir / "apit_emit.json");
  std::ifstream csv(dir / "apit_emit.csv");
  EXPECT_EQ(read_csv(csv), r);
  std::ifstream js(dir / "apit_emit.json");
  EXPECT_EQ(power_result_from_json(json::parse(js)), r);
  try {
    emit_table(r, TableFormat::csv, "/nonexistent-dir/x.csv");
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(PowerStudy, ReadCsvRejectsGarbage) {
  std::istringstream bad_header("a,b,c\n");
  EXPECT_THROW(read_csv(bad_header), ParseError);
  std::istringstream bad_row(std::string(kPowerCsvHeader) + "\nx,1,2,0.05,wilks,3\n");
  EXPECT_THROW(read_csv(bad_row), ParseError);
  std::istringstream bad_test(std::string(kPowerCsvHeader) + "\nx,1,2,0.05,kendall,3,10,0.1\n");
  EXPECT_THROW(read_csv(bad_test), ParseError);
}

TEST(PowerStudy, GaussianNullRow) {
  const json j = {{"seed", 11},
                  {"replicates", 100},
                  {"sample_sizes", {200}},
                  {"alphas", {0.05}},
                  {"scenarios", {{{"id", "null"}, {"kind", "gaussian_copula"}, {"rho", 0.0},
                                  {"margins", {"normal:0,1", "normal:0,1"}}}}}};
  const auto r = run_power_study(config_from_json(j));
  for (const auto& rec : r.records) EXPECT_LE(rec.rejections, 12u) << to_string(rec.test);
}

TEST(PowerStudy, CircularCircularHighDependence) {
  const json j = {{"seed", 12},
                  {"replicates", 100},
                  {"sample_sizes", {200}},
                  {"alphas", {0.05}},
                  {"tests", {"apit_rayleigh", "apit_pycke"}},
                  {"scenarios", {{{"id", "cc"}, {"kind", "jw_circ_circ"}, {"c0", 0.7}}}}};
  const auto r = run_power_study(config_from_json(j));
  for (const auto& rec : r.records) EXPECT_GE(rec.rejections, 95u) << to_string(rec.test);
}

TEST(PowerStudy, JwPowerNonIncreasingInC0) {
  const std::vector<double> c0s{0.7, 0.8, 0.9, 0.99, 0.9999};
  for (const char* kind : {"jw_circ_lin", "jw_circ_circ"}) {
    const json j = {{"seed", 13},
                    {"replicates", 100},
                    {"sample_sizes", {200}},
                    {"alphas", {0.05}},
                    {"tests", {"apit_rayleigh", "apit_pycke"}},
                    {"scenarios", {{{"id", "jw"}, {"kind", kind}, {"c0", c0s}}}}};
    const auto r = run_power_study(config_from_json(j));
    for (auto t : {StudyTest::apit_rayleigh, StudyTest::apit_pycke}) {
      int inversions = 0;
      for (std::size_t i = 1; i < c0s.size(); ++i) {
        const auto prev = r.find("jw", c0s[i - 1], 200, 0.05, t)->rejections;
        const auto cur = r.find("jw", c0s[i], 200, 0.05, t)->rejections;
        if (cur > prev) {
          ++inversions;
          EXPECT_LE(cur - prev, 3u) << kind << " " << to_string(t) << " at c0=" << c0s[i];
        }
      }
      EXPECT_LE(inversions, 1) << kind << " " << to_string(t);
    }
  }
}

TEST(PowerStudy, SharedCacheIsReused) {
  PyckeTableCache cache;
  auto j = base_config();
  j["sample_sizes"] = {20, 25};
  const auto cfg = config_from_json(j);
  run_power_study(cfg, {1, &cache});
  EXPECT_EQ(cache.size(), 2u);
  run_power_study(cfg, {1, &cache});
  EXPECT_EQ(cache.size(), 2u);
}

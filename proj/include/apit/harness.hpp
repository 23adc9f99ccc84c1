#pragma once

// Seeded Monte-Carlo power studies over a grid of scenarios, sample sizes,
// significance levels and tests, with CSV and JSON result tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "apit/apit_test.hpp"
#include "apit/baselines.hpp"
#include "apit/errors.hpp"
#include "apit/io_json.hpp"
#include "apit/models.hpp"
#include "apit/nnts.hpp"
#include "apit/parallel.hpp"
#include "apit/random.hpp"
#include "apit/uniformity.hpp"
#include "apit/version.hpp"

namespace apit {

enum class ScenarioKind { jw_circ_circ, jw_circ_lin, gaussian_copula, frank_copula };

constexpr std::string_view to_string(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::jw_circ_circ: return "jw_circ_circ";
    case ScenarioKind::jw_circ_lin: return "jw_circ_lin";
    case ScenarioKind::gaussian_copula: return "gaussian_copula";
    case ScenarioKind::frank_copula: return "frank_copula";
  }
  return "?";
}

inline std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  for (auto k : {ScenarioKind::jw_circ_circ, ScenarioKind::jw_circ_lin, ScenarioKind::gaussian_copula,
                 ScenarioKind::frank_copula})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Name of the dependence parameter of each scenario kind.
constexpr std::string_view param_name(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::jw_circ_circ:
    case ScenarioKind::jw_circ_lin: return "c0";
    case ScenarioKind::gaussian_copula: return "rho";
    case ScenarioKind::frank_copula: return "phi";
  }
  return "?";
}

enum class StudyTest { apit_rayleigh, apit_pycke, wilks, empirical_copula };

inline constexpr std::array<StudyTest, 4> kAllStudyTests{StudyTest::apit_rayleigh, StudyTest::apit_pycke,
                                                         StudyTest::wilks, StudyTest::empirical_copula};

constexpr std::string_view to_string(StudyTest t) noexcept {
  switch (t) {
    case StudyTest::apit_rayleigh: return "apit_rayleigh";
    case StudyTest::apit_pycke: return "apit_pycke";
    case StudyTest::wilks: return "wilks";
    case StudyTest::empirical_copula: return "empirical_copula";
  }
  return "?";
}

inline std::optional<StudyTest> parse_study_test(std::string_view s) {
  for (auto t : kAllStudyTests)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

// Default NNTS shapes for the Johnson-Wehrly designs. Only c_0 of the joining
// density is a design parameter; the remaining coefficients come from these
// fixed seeds (see random_nnts).
inline constexpr std::size_t kJoiningDegree = 3;
inline constexpr std::uint64_t kJoiningSeed = 887;
inline const NNTSParams& default_circular_margin() {
  static const NNTSParams p = random_nnts(3, 0.6, 31);
  return p;
}
inline const NNTSParams& default_second_circular_margin() {
  static const NNTSParams p = random_nnts(2, 0.6, 47);
  return p;
}

struct Scenario {
  std::string id;
  ScenarioKind kind = ScenarioKind::gaussian_copula;
  double param = 0.0;  // c0 (JW), rho (Gaussian) or phi (Frank)
  Sign sign = Sign::difference;                // model sign; lambda uses it
  Direction direction = Direction::difference;  // direction tested by the APIT tests
  std::size_t joining_degree = kJoiningDegree;
  std::uint64_t joining_seed = kJoiningSeed;
  NNTSParams circular_margin = default_circular_margin();
  NNTSParams second_circular_margin = default_second_circular_margin();
  LinearMarginal linear_margin = Exponential{1.0};
  std::array<LinearMarginal, 2> margins{Normal{}, Normal{}};

  NNTSParams joining() const { return random_nnts(joining_degree, param, joining_seed); }
};

/// One draw of size n from the scenario's joint distribution.
inline BivariateSample draw_scenario_sample(const Scenario& s, std::size_t n, Rng& rng) {
  switch (s.kind) {
    case ScenarioKind::jw_circ_circ:
      return jw_sample_circular_circular(s.joining(), s.circular_margin, s.second_circular_margin, s.sign, n, rng);
    case ScenarioKind::jw_circ_lin:
      return jw_sample_circular_linear(s.joining(), s.circular_margin, s.linear_margin, s.sign, n, rng);
    case ScenarioKind::gaussian_copula:
      return gaussian_copula_sample(s.param, s.margins[0], s.margins[1], n, rng);
    case ScenarioKind::frank_copula:
      return frank_copula_sample(s.param, s.margins[0], s.margins[1], n, rng);
  }
  throw DomainError("draw_scenario_sample: unknown scenario kind");
}

inline void validate_scenario(const Scenario& s, const std::string& path) {
  if (s.id.empty()) throw ConfigError(path + ".id", "must not be empty");
  if (s.id.find_first_of(",\n\r\"") != std::string::npos)
    throw ConfigError(path + ".id", "must not contain commas, quotes or newlines");
  const std::string ppath = path + "." + std::string(param_name(s.kind));
  switch (s.kind) {
    case ScenarioKind::jw_circ_circ:
    case ScenarioKind::jw_circ_lin:
      if (!(s.param > 0.0 && s.param <= 1.0)) throw ConfigError(ppath, "must lie in (0, 1]");
      if (s.joining_degree < 1) throw ConfigError(path + ".joining.M", "must be >= 1");
      break;
    case ScenarioKind::gaussian_copula:
      if (!(std::abs(s.param) < 1.0)) throw ConfigError(ppath, "must satisfy |rho| < 1");
      break;
    case ScenarioKind::frank_copula:
      if (!(s.param >= 0.0) || !std::isfinite(s.param)) throw ConfigError(ppath, "must be >= 0");
      break;
  }
}

struct PowerStudyConfig {
  std::string name = "power_study";
  std::vector<Scenario> scenarios;
  std::vector<std::size_t> sample_sizes;
  std::vector<double> alphas{0.10, 0.05, 0.01};
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  std::vector<StudyTest> tests{kAllStudyTests.begin(), kAllStudyTests.end()};
  std::size_t pycke_reps = 2000;
  std::size_t permutations = 200;
};

inline void validate(const PowerStudyConfig& cfg) {
  if (cfg.replicates < 1) throw ConfigError("replicates", "must be >= 1");
  for (std::size_t i = 0; i < cfg.sample_sizes.size(); ++i)
    if (cfg.sample_sizes[i] < 5) throw ConfigError("sample_sizes[" + std::to_string(i) + "]", "must be >= 5");
  for (std::size_t i = 0; i < cfg.alphas.size(); ++i)
    if (!(cfg.alphas[i] > 0.0 && cfg.alphas[i] < 1.0))
      throw ConfigError("alphas[" + std::to_string(i) + "]", "must lie in (0, 1)");
  if (cfg.pycke_reps < 1000) throw ConfigError("pycke_reps", "must be >= 1000");
  if (cfg.permutations < 99) throw ConfigError("permutations", "must be >= 99");
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i)
    validate_scenario(cfg.scenarios[i], "scenarios[" + std::to_string(i) + "]");
}

struct PowerRecord {
  std::string scenario;
  double param = 0.0;
  std::size_t n = 0;
  double alpha = 0.0;
  StudyTest test = StudyTest::apit_rayleigh;
  std::size_t rejections = 0;
  std::size_t replicates = 0;
  double mean_lambda = 0.0;

  friend bool operator==(const PowerRecord&, const PowerRecord&) = default;
};

struct PowerStudyResult {
  std::string name;
  std::string version{kVersion};
  std::uint64_t seed = 0;
  std::vector<PowerRecord> records;

  friend bool operator==(const PowerStudyResult&, const PowerStudyResult&) = default;

  const PowerRecord* find(std::string_view scenario, double param, std::size_t n, double alpha,
                          StudyTest test) const {
    for (const auto& r : records)
      if (r.scenario == scenario && r.param == param && r.n == n && r.alpha == alpha && r.test == test) return &r;
    return nullptr;
  }
};

struct RunOptions {
  unsigned threads = 0;               // 0 = hardware concurrency
  PyckeTableCache* cache = nullptr;   // nullptr: a cache private to the run
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t double_bits(double v) noexcept {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

/// Stream key of a scenario: independent of its position in the config.
inline std::uint64_t scenario_key(const Scenario& s) noexcept {
  return splitmix64(fnv1a(s.id) ^ splitmix64(double_bits(s.param)));
}

inline constexpr std::uint64_t kPyckeTableStream = 0x50594B4345ULL;

struct ReplicateOutcome {
  std::array<double, 4> p_value{1.0, 1.0, 1.0, 1.0};
  double lambda = 0.0;
};

}  // namespace detail

/// Seed of the Pycke null table the study uses for sample size n.
inline std::uint64_t pycke_table_seed(std::uint64_t study_seed, std::size_t n) noexcept {
  return derive_seed(study_seed, {detail::kPyckeTableStream, n});
}

/// Runs every (scenario, n, replicate) cell. Replicate r of scenario s at size
/// n draws from derive_seed(seed, {key(s), n, r}); the output depends only on
/// the config, never on the thread count.
inline PowerStudyResult run_power_study(const PowerStudyConfig& cfg, const RunOptions& run = {}) {
  validate(cfg);
  PyckeTableCache local_cache;
  PyckeTableCache& cache = run.cache != nullptr ? *run.cache : local_cache;

  const bool wants_pycke = std::find(cfg.tests.begin(), cfg.tests.end(), StudyTest::apit_pycke) != cfg.tests.end();
  std::map<std::size_t, std::shared_ptr<const PyckeNullTable>> tables;
  if (wants_pycke)
    for (std::size_t n : cfg.sample_sizes)
      tables.emplace(n, cache.get(n, cfg.pycke_reps, pycke_table_seed(cfg.seed, n), run.threads));

  // joining densities are fixed per scenario
  std::vector<Scenario> scenarios = cfg.scenarios;

  const std::size_t n_sizes = cfg.sample_sizes.size();
  const std::size_t reps = cfg.replicates;
  const std::size_t total = scenarios.size() * n_sizes * reps;
  std::vector<detail::ReplicateOutcome> outcomes(total);

  parallel_for(total, run.threads, [&](std::size_t task) {
    const std::size_t r = task % reps;
    const std::size_t ni = (task / reps) % n_sizes;
    const std::size_t si = task / (reps * n_sizes);
    const Scenario& sc = scenarios[si];
    const std::size_t n = cfg.sample_sizes[ni];

    Rng rng(derive_seed(cfg.seed, {detail::scenario_key(sc), n, r}));
    const BivariateSample sample = draw_scenario_sample(sc, n, rng);

    detail::ReplicateOutcome& out = outcomes[task];
    for (StudyTest t : cfg.tests) {
      double p = 1.0;
      switch (t) {
        case StudyTest::apit_rayleigh:
        case StudyTest::apit_pycke: {
          ApitOptions opt;
          opt.method = t == StudyTest::apit_rayleigh ? UniformityMethod::rayleigh : UniformityMethod::pycke;
          opt.direction = sc.direction;
          opt.compute_lambda = false;
          if (t == StudyTest::apit_pycke) opt.pycke_table = tables.at(n).get();
          p = apit_independence_test(sample, opt).p_value;
          break;
        }
        case StudyTest::wilks:
          p = wilks_test(sample.x, sample.y).p_value;
          break;
        case StudyTest::empirical_copula:
          p = empirical_copula_test(sample.x, sample.y, cfg.permutations, rng).p_value;
          break;
      }
      out.p_value[static_cast<std::size_t>(t)] = p;
    }
    const CircularSample combined = apit_combine(apit_transform(sample.x), apit_transform(sample.y), sc.sign);
    out.lambda = lambda_hat(combined).value_or(0.0);
  });

  PowerStudyResult result;
  result.name = cfg.name;
  result.seed = cfg.seed;
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    for (std::size_t ni = 0; ni < n_sizes; ++ni) {
      const std::size_t base = (si * n_sizes + ni) * reps;
      double lambda_sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) lambda_sum += outcomes[base + r].lambda;
      const double mean_lambda = lambda_sum / static_cast<double>(reps);
      for (double alpha : cfg.alphas) {
        for (StudyTest t : cfg.tests) {
          std::size_t rejections = 0;
          for (std::size_t r = 0; r < reps; ++r)
            if (outcomes[base + r].p_value[static_cast<std::size_t>(t)] <= alpha) ++rejections;
          result.records.push_back({scenarios[si].id, scenarios[si].param, cfg.sample_sizes[ni], alpha, t,
                                    rejections, reps, mean_lambda});
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Result tables

inline constexpr std::string_view kPowerCsvHeader = "scenario,param,n,alpha,test,rejections,replicates,mean_lambda";

inline void write_csv(std::ostream& out, const PowerStudyResult& result) {
  out << "# apit power study\n"
      << "# name=" << result.name << '\n'
      << "# version=" << result.version << '\n'
      << "# seed=" << result.seed << '\n'
      << kPowerCsvHeader << '\n';
  for (const auto& r : result.records) {
    out << r.scenario << ',' << detail::format_double(r.param) << ',' << r.n << ','
        << detail::format_double(r.alpha) << ',' << to_string(r.test) << ',' << r.rejections << ','
        << r.replicates << ',' << detail::format_double(r.mean_lambda) << '\n';
  }
}

inline PowerStudyResult read_csv(std::istream& in) {
  PowerStudyResult result;
  result.version.clear();
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = std::string_view(line).substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view key = body.substr(0, eq);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      const std::string_view value = body.substr(eq + 1);
      if (key == "name") result.name = value;
      else if (key == "version") result.version = value;
      else if (key == "seed") result.seed = detail::parse_integer<std::uint64_t>(value, lineno);
      continue;
    }
    if (!header_seen) {
      if (line != kPowerCsvHeader) throw ParseError(lineno, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      f.push_back(rest.substr(0, pos));
    f.push_back(rest);
    if (f.size() != 8) throw ParseError(lineno, "expected 8 fields");
    PowerRecord r;
    r.scenario = f[0];
    r.param = detail::parse_double(f[1], lineno);
    r.n = detail::parse_integer<std::size_t>(f[2], lineno);
    r.alpha = detail::parse_double(f[3], lineno);
    const auto t = parse_study_test(f[4]);
    if (!t) throw ParseError(lineno, "unknown test '" + std::string(f[4]) + "'");
    r.test = *t;
    r.rejections = detail::parse_integer<std::size_t>(f[5], lineno);
    r.replicates = detail::parse_integer<std::size_t>(f[6], lineno);
    r.mean_lambda = detail::parse_double(f[7], lineno);
    result.records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(lineno, "missing CSV header");
  return result;
}

inline nlohmann::json to_json(const PowerStudyResult& result) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) {
    records.push_back({{"scenario", r.scenario},
                       {"param", r.param},
                       {"n", r.n},
                       {"alpha", r.alpha},
                       {"test", std::string(to_string(r.test))},
                       {"rejections", r.rejections},
                       {"replicates", r.replicates},
                       {"mean_lambda", r.mean_lambda}});
  }
  return {{"name", result.name}, {"version", result.version}, {"seed", result.seed}, {"records", records}};
}

inline PowerStudyResult power_result_from_json(const nlohmann::json& j) {
  try {
    PowerStudyResult result;
    result.name = j.at("name").get<std::string>();
    result.version = j.at("version").get<std::string>();
    result.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jr : j.at("records")) {
      PowerRecord r;
      r.scenario = jr.at("scenario").get<std::string>();
      r.param = jr.at("param").get<double>();
      r.n = jr.at("n").get<std::size_t>();
      r.alpha = jr.at("alpha").get<double>();
      const auto t = parse_study_test(jr.at("test").get<std::string>());
      if (!t) throw ParseError(0, "unknown test in power result");
      r.test = *t;
      r.rejections = jr.at("rejections").get<std::size_t>();
      r.replicates = jr.at("replicates").get<std::size_t>();
      r.mean_lambda = jr.at("mean_lambda").get<double>();
      result.records.push_back(std::move(r));
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("power result JSON: ") + e.what());
  }
}

enum class TableFormat { csv, json };

/// Writes the result table to `path`; I/O failures name the path.
inline void emit_table(const PowerStudyResult& result, TableFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  if (format == TableFormat::csv)
    write_csv(out, result);
  else
    out << to_json(result).dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline NNTSParams nnts_from_config(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  if (j.contains("c")) {
    try {
      return nnts_from_json(j);
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
  }
  const auto m = j.value("M", std::size_t{3});
  const auto c0 = j.value("c0", 0.6);
  const auto seed = j.value("seed", std::uint64_t{1});
  try {
    return random_nnts(m, c0, seed);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

inline LinearMarginal marginal_from_config(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string such as \"normal:0,1\"");
  try {
    return parse_marginal(j.get<std::string>());
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path.empty() ? std::string(key) : path + "." + key, "missing or has the wrong type");
  }
}

}  // namespace detail

/// Parses a config object. A scenario's parameter (c0 / rho / phi) may be a
/// number or an array; arrays expand into one scenario per value.
inline PowerStudyConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  PowerStudyConfig cfg;
  if (j.contains("name")) cfg.name = detail::get_field<std::string>(j, "name", "");
  if (j.contains("seed")) cfg.seed = detail::get_field<std::uint64_t>(j, "seed", "");
  if (j.contains("replicates")) cfg.replicates = detail::get_field<std::size_t>(j, "replicates", "");
  if (j.contains("pycke_reps")) cfg.pycke_reps = detail::get_field<std::size_t>(j, "pycke_reps", "");
  if (j.contains("permutations")) cfg.permutations = detail::get_field<std::size_t>(j, "permutations", "");
  cfg.sample_sizes = detail::get_field<std::vector<std::size_t>>(j, "sample_sizes", "");
  if (j.contains("alphas")) cfg.alphas = detail::get_field<std::vector<double>>(j, "alphas", "");
  if (j.contains("tests")) {
    cfg.tests.clear();
    const auto names = detail::get_field<std::vector<std::string>>(j, "tests", "");
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto t = parse_study_test(names[i]);
      if (!t) throw ConfigError("tests[" + std::to_string(i) + "]", "unknown test '" + names[i] + "'");
      if (std::find(cfg.tests.begin(), cfg.tests.end(), *t) == cfg.tests.end()) cfg.tests.push_back(*t);
    }
  }

  if (!j.contains("scenarios") || !j.at("scenarios").is_array())
    throw ConfigError("scenarios", "missing or not an array");
  const auto& list = j.at("scenarios");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& js = list[i];
    const std::string path = "scenarios[" + std::to_string(i) + "]";
    if (!js.is_object()) throw ConfigError(path, "expected an object");

    Scenario s;
    const auto kind_name = detail::get_field<std::string>(js, "kind", path);
    const auto kind = parse_scenario_kind(kind_name);
    if (!kind) throw ConfigError(path + ".kind", "unknown scenario kind '" + kind_name + "'");
    s.kind = *kind;

    if (js.contains("sign")) {
      const auto v = detail::get_field<std::string>(js, "sign", path);
      if (v == "sum") s.sign = Sign::sum;
      else if (v == "difference") s.sign = Sign::difference;
      else throw ConfigError(path + ".sign", "expected \"sum\" or \"difference\"");
    }
    s.direction = to_direction(s.sign);
    if (js.contains("direction")) {
      const auto v = detail::get_field<std::string>(js, "direction", path);
      if (v == "sum") s.direction = Direction::sum;
      else if (v == "difference") s.direction = Direction::difference;
      else if (v == "auto") s.direction = Direction::automatic;
      else throw ConfigError(path + ".direction", "expected \"sum\", \"difference\" or \"auto\"");
    }

    std::string default_id(to_string(s.kind));
    switch (s.kind) {
      case ScenarioKind::jw_circ_lin:
        if (js.contains("circular_margin")) s.circular_margin = detail::nnts_from_config(js["circular_margin"], path + ".circular_margin");
        if (js.contains("linear_margin")) s.linear_margin = detail::marginal_from_config(js["linear_margin"], path + ".linear_margin");
        default_id += "/" + to_string(s.linear_margin);
        [[fallthrough]];
      case ScenarioKind::jw_circ_circ:
        if (js.contains("joining")) {
          const auto& g = js["joining"];
          if (!g.is_object()) throw ConfigError(path + ".joining", "expected an object");
          s.joining_degree = g.value("M", kJoiningDegree);
          s.joining_seed = g.value("seed", kJoiningSeed);
        }
        if (s.kind == ScenarioKind::jw_circ_circ) {
          if (js.contains("circular_margins")) {
            const auto& cm = js["circular_margins"];
            if (!cm.is_array() || cm.size() != 2) throw ConfigError(path + ".circular_margins", "expected two NNTS specs");
            s.circular_margin = detail::nnts_from_config(cm[0], path + ".circular_margins[0]");
            s.second_circular_margin = detail::nnts_from_config(cm[1], path + ".circular_margins[1]");
          }
        }
        break;
      case ScenarioKind::gaussian_copula:
      case ScenarioKind::frank_copula:
        if (js.contains("margins")) {
          const auto& m = js["margins"];
          if (!m.is_array() || m.size() != 2) throw ConfigError(path + ".margins", "expected two marginal specs");
          s.margins[0] = detail::marginal_from_config(m[0], path + ".margins[0]");
          s.margins[1] = detail::marginal_from_config(m[1], path + ".margins[1]");
        }
        default_id += "/" + to_string(s.margins[0]) + "+" + to_string(s.margins[1]);
        break;
    }
    std::replace(default_id.begin(), default_id.end(), ',', ';');
    s.id = js.contains("id") ? detail::get_field<std::string>(js, "id", path) : default_id;

    const std::string pname(param_name(s.kind));
    if (!js.contains(pname)) throw ConfigError(path + "." + pname, "missing");
    const auto& pv = js[pname];
    std::vector<double> values;
    if (pv.is_number()) {
      values.push_back(pv.get<double>());
    } else if (pv.is_array()) {
      for (std::size_t k = 0; k < pv.size(); ++k) {
        if (!pv[k].is_number()) throw ConfigError(path + "." + pname + "[" + std::to_string(k) + "]", "expected a number");
        values.push_back(pv[k].get<double>());
      }
    } else {
      throw ConfigError(path + "." + pname, "expected a number or an array of numbers");
    }
    for (double v : values) {
      Scenario copy = s;
      copy.param = v;
      validate_scenario(copy, path);
      cfg.scenarios.push_back(std::move(copy));
    }
  }
  validate(cfg);
  return cfg;
}

inline PowerStudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Environment variable that overrides the configured seed.
inline constexpr const char* kSeedEnvVar = "APIT_SEED";

/// Parses APIT_SEED if set; throws ConfigError when it is not an integer.
inline std::optional<std::uint64_t> seed_from_environment() {
  const char* v = std::getenv(kSeedEnvVar);
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    return detail::parse_integer<std::uint64_t>(v, 0);
  } catch (const ParseError&) {
    throw ConfigError(kSeedEnvVar, "not an unsigned integer: '" + std::string(v) + "'");
  }
}

}  // namespace apit

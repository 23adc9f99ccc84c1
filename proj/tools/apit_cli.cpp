// apit: independence testing, NNTS fitting, sampling and power studies.
//
// Exit codes: 0 success, 2 usage / parse / domain / config error,
// 3 numeric failure or degenerate input.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "apit/apit.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::optional<std::uint64_t> seed;
  bool json = false;
};

/// --seed, then APIT_SEED, then the fallback.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto env = apit::seed_from_environment()) return *env;
  return fallback;
}

apit::DataTable read_table(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return apit::read_data_table(in, columns);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

const std::map<std::string, apit::MarginKind> kKinds{{"circular", apit::MarginKind::circular},
                                                     {"linear", apit::MarginKind::linear}};
const std::map<std::string, apit::AngleUnit> kUnits{{"rad", apit::AngleUnit::rad}, {"deg", apit::AngleUnit::deg}};
const std::map<std::string, apit::Direction> kDirections{{"sum", apit::Direction::sum},
                                                         {"difference", apit::Direction::difference},
                                                         {"auto", apit::Direction::automatic}};
const std::map<std::string, apit::UniformityMethod> kMethods{{"rayleigh", apit::UniformityMethod::rayleigh},
                                                             {"pycke", apit::UniformityMethod::pycke}};

// ---------------------------------------------------------------------------

struct TestArgs {
  std::string file;
  std::string kind1 = "linear";
  std::string kind2 = "linear";
  std::string unit = "rad";
  std::string direction = "auto";
  std::string method = "pycke";
  std::size_t pycke_reps = 10000;
  unsigned threads = 1;
  std::string cache_dir;
};

int cmd_test(const TestArgs& a, const Common& c) {
  const auto table = read_table(a.file, 2);
  const auto sample = apit::to_bivariate(table, kKinds.at(a.kind1), kKinds.at(a.kind2), kUnits.at(a.unit));

  apit::ApitOptions opt;
  opt.method = kMethods.at(a.method);
  opt.direction = kDirections.at(a.direction);
  opt.pycke_reps = a.pycke_reps;
  opt.seed = resolve_seed(c.seed, 1);
  opt.threads = a.threads;
  apit::PyckeTableCache cache;
  if (!a.cache_dir.empty()) cache.set_directory(a.cache_dir);
  opt.cache = &cache;

  const auto r = apit::apit_independence_test(sample, opt);
  if (c.json) {
    std::cout << apit::to_json(r, opt.seed).dump(2) << '\n';
    return 0;
  }
  std::cout << "method      " << apit::method_name(r.method) << '\n'
            << "direction   " << apit::to_string(r.direction);
  if (r.requested == apit::Direction::automatic) std::cout << " (auto, Bonferroni-adjusted)";
  std::cout << '\n'
            << "n           " << r.n << '\n'
            << "statistic   " << fmt(r.statistic) << '\n'
            << "p_value     " << fmt(r.p_value) << '\n'
            << "lambda_hat  " << (r.lambda_hat ? fmt(*r.lambda_hat) : std::string("n/a")) << '\n';
  if (r.method == apit::UniformityMethod::pycke)
    std::cout << "seed        " << opt.seed << " (" << opt.pycke_reps << " null replicates)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string file;
  std::size_t degree = 1;
  std::string unit = "rad";
};

int cmd_fit(const FitArgs& a, const Common& c) {
  const auto table = read_table(a.file, 1);
  const apit::CircularSample s(apit::to_radians(table.columns[0], kUnits.at(a.unit)));
  const auto fit = apit::nnts_fit(s, a.degree);
  if (c.json) {
    auto j = apit::to_json(fit);
    j["n"] = s.size();
    j["version"] = std::string(apit::kVersion);
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << "M               " << fit.params.degree() << '\n' << "n               " << s.size() << '\n';
  const auto coef = fit.params.coefficients();
  for (std::size_t k = 0; k < coef.size(); ++k)
    std::cout << "c_" << k << (k < 10 ? "             " : "            ") << fmt(coef[k].real())
              << (coef[k].imag() < 0 ? " - " : " + ") << fmt(std::abs(coef[k].imag())) << "i\n";
  std::cout << "log_likelihood  " << fmt(fit.log_likelihood) << '\n';
  if (fit.params.degree() >= 1) std::cout << "lambda_hat      " << fmt(apit::lambda_c0(fit.params)) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string kind;
  double param = 0.0;
  std::size_t n = 0;
  std::string sign = "difference";
  std::string linear_margin = "exponential:1";
  std::string margin1 = "normal:0,1";
  std::string margin2 = "normal:0,1";
  std::size_t joining_degree = apit::kJoiningDegree;
  std::uint64_t joining_seed = apit::kJoiningSeed;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, const Common& c) {
  if (a.n == 0) throw apit::DomainError("simulate: --n must be >= 1");
  nlohmann::json js = {{"kind", a.kind},
                       {"sign", a.sign},
                       {"joining", {{"M", a.joining_degree}, {"seed", a.joining_seed}}},
                       {"linear_margin", a.linear_margin},
                       {"margins", {a.margin1, a.margin2}}};
  const auto kind = apit::parse_scenario_kind(a.kind);
  if (!kind) throw apit::ConfigError("--kind", "unknown scenario kind '" + a.kind + "'");
  js[std::string(apit::param_name(*kind))] = a.param;
  // reuse the config parser so flags and config files validate identically
  const nlohmann::json cfg = {{"sample_sizes", {a.n < 5 ? 5 : a.n}}, {"scenarios", {js}}};
  const auto parsed = apit::config_from_json(cfg);

  const std::uint64_t seed = resolve_seed(c.seed, 1);
  apit::Rng rng(seed);
  const auto sample = apit::draw_scenario_sample(parsed.scenarios.front(), a.n, rng);
  const char* nx = sample.kind_x == apit::MarginKind::circular ? "theta1" : "x";
  const char* ny = sample.kind_y == apit::MarginKind::circular ? (sample.kind_x == apit::MarginKind::circular ? "theta2" : "y") : "y";
  if (a.out.empty() || a.out == "-") {
    apit::write_data_table(std::cout, sample, nx, ny);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + a.out + "' for writing");
    apit::write_data_table(out, sample, nx, ny);
    if (!out) throw std::runtime_error("failed writing '" + a.out + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PowerArgs {
  std::string config;
  std::string out_csv;
  std::string out_json;
  unsigned threads = 0;
  std::string cache_dir;
};

int cmd_power(const PowerArgs& a, const Common& c) {
  auto cfg = apit::load_config(a.config);
  cfg.seed = resolve_seed(c.seed, cfg.seed);

  apit::PyckeTableCache cache;
  if (!a.cache_dir.empty()) cache.set_directory(a.cache_dir);
  const auto result = apit::run_power_study(cfg, {a.threads, &cache});

  const std::string stem = std::filesystem::path(a.config).stem().string();
  const std::string csv = a.out_csv.empty() ? stem + ".csv" : a.out_csv;
  const std::string json = a.out_json.empty() ? stem + ".json" : a.out_json;
  apit::emit_table(result, apit::TableFormat::csv, csv);
  apit::emit_table(result, apit::TableFormat::json, json);
  if (c.json)
    std::cout << apit::to_json(result).dump(2) << '\n';
  else
    std::cout << "wrote " << result.records.size() << " records to " << csv << " and " << json << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"APIT independence tests for circular and linear data"};
  app.set_version_flag("--version", std::string(apit::kVersion));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "random seed (default: APIT_SEED, then 1 or the config seed)");
    sub->add_flag("--json", common.json, "machine-readable JSON output");
  };

  TestArgs ta;
  auto* test = app.add_subcommand("test", "test two columns for independence");
  test->add_option("file", ta.file, "delimited file with a header and two columns")->required();
  test->add_option("--kind1", ta.kind1, "kind of column 1")->transform(CLI::IsMember(kKinds));
  test->add_option("--kind2", ta.kind2, "kind of column 2")->transform(CLI::IsMember(kKinds));
  test->add_option("--unit", ta.unit, "unit of circular columns")->transform(CLI::IsMember(kUnits));
  test->add_option("--direction", ta.direction, "combination of the APITs")
      ->transform(CLI::IsMember(kDirections));
  test->add_option("--method", ta.method, "uniformity test")->transform(CLI::IsMember(kMethods));
  test->add_option("--pycke-reps", ta.pycke_reps, "Monte Carlo null replicates for Pycke")
      ->check(CLI::Range(std::size_t{1000}, std::size_t{10000000}));
  test->add_option("--threads", ta.threads, "threads for building the Pycke null table (0 = all)");
  test->add_option("--cache-dir", ta.cache_dir, "directory for persisted Pycke null tables")
      ->envname("APIT_CACHE_DIR");
  add_common(test);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "fit an NNTS density to one circular column");
  fit->add_option("file", fa.file, "delimited file with a header and one column")->required();
  fit->add_option("--M", fa.degree, "NNTS degree")->required();
  fit->add_option("--unit", fa.unit, "angle unit")->transform(CLI::IsMember(kUnits));
  add_common(fit);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "draw a sample from a simulation scenario");
  sim->add_option("--kind", sa.kind, "jw_circ_circ, jw_circ_lin, gaussian_copula or frank_copula")->required();
  sim->add_option("--param", sa.param, "c0, rho or phi, depending on --kind")->required();
  sim->add_option("--n", sa.n, "sample size")->required();
  sim->add_option("--sign", sa.sign, "JW model sign: sum or difference");
  sim->add_option("--linear-margin", sa.linear_margin, "linear margin of jw_circ_lin, e.g. exponential:1");
  sim->add_option("--margin1", sa.margin1, "first copula margin, e.g. normal:0,1");
  sim->add_option("--margin2", sa.margin2, "second copula margin");
  sim->add_option("--joining-M", sa.joining_degree, "degree of the NNTS joining density");
  sim->add_option("--joining-seed", sa.joining_seed, "seed of the joining density's coefficients");
  sim->add_option("--out", sa.out, "output file (default stdout)");
  add_common(sim);

  PowerArgs pa;
  auto* power = app.add_subcommand("power", "run a Monte Carlo power study");
  power->add_option("--config", pa.config, "JSON study config")->required();
  power->add_option("--out-csv", pa.out_csv, "CSV output (default <config stem>.csv)");
  power->add_option("--out-json", pa.out_json, "JSON output (default <config stem>.json)");
  power->add_option("--threads", pa.threads, "worker threads (0 = all)");
  power->add_option("--cache-dir", pa.cache_dir, "directory for persisted Pycke null tables")
      ->envname("APIT_CACHE_DIR");
  add_common(power);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (test->parsed()) return cmd_test(ta, common);
    if (fit->parsed()) return cmd_fit(fa, common);
    if (sim->parsed()) return cmd_simulate(sa, common);
    if (power->parsed()) return cmd_power(pa, common);
  } catch (const apit::DegenerateInputError& e) {
    std::cerr << "apit: degenerate input: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const apit::NumericError& e) {
    std::cerr << "apit: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const apit::ParseError& e) {
    std::cerr << "apit: parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const apit::ConfigError& e) {
    std::cerr << "apit: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const apit::DomainError& e) {
    std::cerr << "apit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "apit: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

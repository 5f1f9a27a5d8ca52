// theo: command-line harness for the optimizer library.
//
//   theo run        -c cfg.json [--set path=value]...
//   theo compare    -c arm1.json -c arm2.json ...
//   theo sweep      -c cfg.json --axis optimizer.lr --values '[0.1,0.01]'
//   theo ablate     -c cfg.json --replicates 5
//   theo diagnose   [--seed N]
//   theo rate-sweep -c cfg.json
//
// Results go to out_dir; a one-line JSON summary goes to stdout. Failures
// print {"error":{"type":...,"message":...}} to stderr and exit nonzero.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "theo/config.hpp"
#include "theo/diagnostics.hpp"
#include "theo/gibbs.hpp"
#include "theo/harness.hpp"
#include "theo/suite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kChecksFailed = 3 };

struct Common {
  std::vector<std::string> configs;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force = false;
};

int report_error(const std::string& type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
  return code;
}

theo::ExperimentConfig load(const Common& c, const std::string& file) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  if (c.out_dir) overrides.push_back("out_dir=" + json(*c.out_dir).dump());
  auto cfg = theo::load_config(file, overrides);
  cfg.validate();
  return cfg;
}

theo::ExperimentConfig single(const Common& c) {
  if (c.configs.size() > 1) throw theo::ConfigError("expected at most one --config");
  return load(c, c.configs.empty() ? std::string{} : c.configs.front());
}

void guard_output(const fs::path& file, const std::string& hash, bool force) {
  if (force || !fs::exists(file)) return;
  std::ifstream in(file);
  json old;
  try {
    old = json::parse(in);
  } catch (const json::parse_error&) {
    throw std::runtime_error("refusing to overwrite unreadable " + file.string() +
                             " (use --force)");
  }
  if (old.value("config_hash", std::string{}) != hash)
    throw std::runtime_error("refusing to overwrite " + file.string() +
                             " written by a different config (use --force)");
}

int cmd_run(const Common& c) {
  const auto cfg = single(c);
  const auto result = theo::run(cfg);
  theo::write_run(result, c.force);
  const auto& p = result.primary();
  std::cout << json{{"command", "run"},
                    {"config_hash", result.config_hash},
                    {"out_dir", cfg.out_dir},
                    {"final_objective", theo::json_number(p.final_objective)},
                    {"final_distance", theo::json_number(p.final_distance)},
                    {"diverged", p.diverged}}
                   .dump()
            << '\n';
  return kOk;
}

int cmd_compare(const Common& c, double tolerance) {
  std::vector<theo::ExperimentConfig> arms;
  for (const auto& f : c.configs) arms.push_back(load(c, f));
  const auto result = theo::compare(arms, tolerance);
  const fs::path dir = arms.front().out_dir;
  fs::create_directories(dir);
  json verdict = result.verdict;
  std::string joined;
  for (const auto& a : arms) joined += a.hash();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : joined) h = (h ^ ch) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  verdict["config_hash"] = buf;
  guard_output(dir / "verdict.json", buf, c.force);
  theo::write_text(dir / "compare.csv", result.csv);
  theo::write_text(dir / "verdict.json", verdict.dump(2) + "\n");
  std::cout << json{{"command", "compare"}, {"verdict", verdict}}.dump() << '\n';
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values_text) {
  const auto base = single(c);
  json values;
  try {
    values = json::parse(values_text);
  } catch (const json::parse_error& e) {
    throw theo::ConfigError(std::string("--values must be a JSON array: ") + e.what());
  }
  if (!values.is_array() || values.empty())
    throw theo::ConfigError("--values must be a non-empty JSON array");
  const auto result = theo::sweep(base, axis, std::vector<json>(values.begin(), values.end()));
  const fs::path dir = base.out_dir;
  fs::create_directories(dir);
  json doc = result.to_json();
  doc["config_hash"] = base.hash();
  guard_output(dir / "sweep.json", base.hash(), c.force);
  theo::write_text(dir / "sweep.csv", result.csv);
  theo::write_text(dir / "sweep.json", doc.dump(2) + "\n");
  std::cout << json{{"command", "sweep"}, {"axis", axis}, {"runs", result.runs.size()}}.dump()
            << '\n';
  return kOk;
}

int cmd_ablate(const Common& c, std::size_t replicates) {
  const auto cfg = single(c);
  if (cfg.optimizer.name != "theo_poula")
    throw theo::ConfigError("ablate requires optimizer.name = theo_poula");
  const auto result = theo::ablate_boosting(cfg, replicates);
  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  json doc = result.to_json();
  doc["config_hash"] = cfg.hash();
  guard_output(dir / "ablation.json", cfg.hash(), c.force);
  theo::write_text(dir / "ablation.json", doc.dump(2) + "\n");
  std::cout << json{{"command", "ablate"},
                    {"boosted_wins", result.boosted_wins},
                    {"replicates", result.pairs.size()},
                    {"mean_boosted", theo::json_number(result.mean_boosted)},
                    {"mean_unboosted", theo::json_number(result.mean_unboosted)}}
                   .dump()
            << '\n';
  return kOk;
}

int cmd_diagnose(const Common& c) {
  const std::uint64_t seed = c.seed.value_or(1);
  const auto checks = theo::run_property_suite(seed);
  json doc = theo::suite_to_json(checks);
  doc["seed"] = seed;
  if (c.out_dir) {
    fs::create_directories(*c.out_dir);
    theo::write_text(fs::path(*c.out_dir) / "diagnose.json", doc.dump(2) + "\n");
  }
  std::cout << doc.dump() << '\n';
  return doc["all_passed"].get<bool>() ? kOk : kChecksFailed;
}

int cmd_rate_sweep(const Common& c) {
  const auto cfg = single(c);
  if (cfg.optimizer.name != "theo_poula")
    throw theo::ConfigError("rate-sweep requires optimizer.name = theo_poula");
  const auto problem = theo::make_problem(cfg.problem);
  if (problem->dimension() != 1)
    throw theo::ConfigError("rate-sweep supports one-dimensional problems only");
  const auto hp = cfg.optimizer.hyper_params();
  if (!hp.noise_enabled())
    throw theo::ConfigError("rate-sweep needs a finite optimizer.inverse_temperature");
  const auto oracle = theo::GibbsOracle1D::build(
      [&problem](double z) { return problem->objective(std::span<const double>(&z, 1)); },
      hp.inverse_temperature, cfg.rate.lo, cfg.rate.hi, cfg.rate.grid);

  theo::RateSweepSpec spec;
  spec.hp = hp;
  spec.step_sizes = cfg.rate.step_sizes;
  spec.chains = cfg.chains;
  spec.diffusion_time = cfg.rate.diffusion_time;
  spec.seed = cfg.seed;
  spec.init_from_oracle = cfg.rate.init_from_oracle;
  spec.initial = cfg.init.value.empty() ? 0.0 : cfg.init.value.front();
  spec.threads = cfg.threads;
  const auto result = theo::rate_sweep(*problem, oracle, spec);

  std::string csv = "step_size,steps,w1,w2\n";
  json rows = json::array();
  for (const auto& r : result.rows) {
    csv += theo::format_double(r.step_size) + "," + std::to_string(r.steps) + "," +
           theo::format_double(r.w1) + "," + theo::format_double(r.w2) + "\n";
    rows.push_back({{"step_size", r.step_size},
                    {"steps", r.steps},
                    {"w1", theo::json_number(r.w1)},
                    {"w2", theo::json_number(r.w2)}});
  }
  json doc{{"config_hash", cfg.hash()},
           {"rows", rows},
           {"w1_slope", theo::json_number(result.w1_slope)},
           {"w2_slope", theo::json_number(result.w2_slope)},
           {"noise_floor_w1", theo::json_number(result.noise_floor_w1)},
           {"oracle_truncation_mass", theo::json_number(oracle.truncation_mass())}};
  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  guard_output(dir / "rate_sweep.json", cfg.hash(), c.force);
  theo::write_text(dir / "rate_sweep.csv", csv);
  theo::write_text(dir / "rate_sweep.json", doc.dump(2) + "\n");
  std::cout << json{{"command", "rate-sweep"},
                    {"w1_slope", doc["w1_slope"]},
                    {"noise_floor_w1", doc["noise_floor_w1"]}}
                   .dump()
            << '\n';
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool many_configs) {
  if (many_configs)
    sub->add_option("-c,--config", c.configs, "config file (repeat for each arm)")->required();
  else
    sub->add_option("-c,--config", c.configs, "config file (defaults apply when omitted)")
        ->expected(1);
  sub->add_option("--set", c.overrides, "override a config field, path=value");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--out-dir", c.out_dir, "output directory");
  sub->add_flag("--force", c.force, "overwrite outputs from a different config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"theo: tamed Langevin optimizer harness"};
  app.require_subcommand(1);

  Common c;
  double tolerance = 0.1;
  std::string axis, values;
  std::size_t replicates = 5;

  auto* run = app.add_subcommand("run", "run one experiment");
  add_common(run, c, false);
  auto* cmp = app.add_subcommand("compare", "run several optimizer arms on one problem");
  add_common(cmp, c, true);
  cmp->add_option("--tolerance", tolerance, "distance counted as converged");
  auto* swp = app.add_subcommand("sweep", "vary one config field");
  add_common(swp, c, false);
  swp->add_option("--axis", axis, "dotted config path")->required();
  swp->add_option("--values", values, "JSON array of values")->required();
  auto* abl = app.add_subcommand("ablate", "boosted against unboosted matched runs");
  add_common(abl, c, false);
  abl->add_option("--replicates", replicates, "number of seeds")->check(CLI::PositiveNumber);
  auto* dia = app.add_subcommand("diagnose", "run the property checks");
  dia->add_option("--seed", c.seed, "master seed");
  dia->add_option("--out-dir", c.out_dir, "write diagnose.json here");
  auto* rate = app.add_subcommand("rate-sweep", "distance to the Gibbs law per step size");
  add_common(rate, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kUsage);
  }

  try {
    if (*run) return cmd_run(c);
    if (*cmp) return cmd_compare(c, tolerance);
    if (*swp) return cmd_sweep(c, axis, values);
    if (*abl) return cmd_ablate(c, replicates);
    if (*dia) return cmd_diagnose(c);
    if (*rate) return cmd_rate_sweep(c);
  } catch (const theo::ConfigError& e) {
    return report_error("config", e.what(), kUsage);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), kFailure);
  }
  return kUsage;
}

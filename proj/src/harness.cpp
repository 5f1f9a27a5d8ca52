#include "theo/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "theo/averaging.hpp"
#include "theo/diagnostics.hpp"

namespace theo {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json vector_json(std::span<const double> v) {
  json out = json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

std::string arm_label(const ExperimentConfig& c) {
  if (!c.label.empty()) return c.label;
  return c.optimizer.name + "@" + format_double(c.optimizer.lr);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

ParamVector clip_gradient(std::span<const double> grad, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip_gradient: threshold must be > 0");
  ParamVector out(grad.begin(), grad.end());
  const double n = norm2(grad);
  if (n > threshold) {
    const double scale = threshold / n;
    for (double& v : out) v *= scale;
  }
  return out;
}

std::shared_ptr<const Problem> make_problem(const ProblemConfig& config) {
  if (config.name == "motivating") return std::make_shared<MotivatingProblem>();
  if (config.name == "quadratic")
    return std::make_shared<QuadraticProblem>(config.curvature, config.dimension);
  if (config.name == "mlp") return std::make_shared<MlpProblem>(config.mlp);
  throw ConfigError("unknown problem '" + config.name + "'");
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& c,
                                          std::uint64_t noise_seed) {
  if (c.name == "theo_poula")
    return std::make_unique<TheoPoulaOptimizer>(c.hyper_params(), noise_seed);
  if (c.name == "sgd") return std::make_unique<SgdOptimizer>(c.lr, c.momentum);
  AdamState adam;
  adam.beta1 = c.beta1;
  adam.beta2 = c.beta2;
  adam.eps = c.eps;
  adam.bias_correction = c.bias_correction;
  if (c.name == "adam") return std::make_unique<AdamOptimizer>(c.lr, adam);
  if (c.name == "amsgrad") return std::make_unique<AmsGradOptimizer>(c.lr, adam);
  if (c.name == "rmsprop") {
    RmsPropState rms;
    rms.alpha = c.alpha;
    rms.eps = c.eps;
    return std::make_unique<RmsPropOptimizer>(c.lr, rms);
  }
  throw ConfigError("unknown optimizer '" + c.name + "'");
}

ParamVector initial_point(const InitConfig& init, std::size_t dimension,
                          std::uint64_t seed, std::size_t chain) {
  if (init.kind == "explicit") {
    if (init.value.size() == 1) return ParamVector(dimension, init.value[0]);
    if (init.value.size() != dimension)
      throw ConfigError("init.value has " + std::to_string(init.value.size()) +
                        " entries, problem dimension is " + std::to_string(dimension));
    return init.value;
  }
  RandomStream rng(derive_seed(seed, 0x1417'0000ULL + chain));
  ParamVector theta(dimension);
  if (init.kind == "gaussian") {
    for (double& v : theta) v = init.scale * rng.normal();
  } else if (init.kind == "uniform") {
    for (double& v : theta) v = rng.uniform(init.low, init.high);
  } else {
    throw ConfigError("unknown init.kind '" + init.kind + "'");
  }
  return theta;
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto problem = make_problem(config.problem);
  const std::size_t d = problem->dimension();
  const auto optimum = problem->optimum();

  RunResult result;
  result.config = config;
  result.config_hash = config.hash();
  result.chains.resize(config.chains);
  std::vector<std::vector<TrajectoryRecord>> per_chain(config.chains);

  parallel_for(config.chains, config.threads, [&](std::size_t c) {
    RandomStream data(derive_seed(config.seed, 2 * c));
    auto optimizer = make_optimizer(config.optimizer, derive_seed(config.seed, 2 * c + 1));
    ParamVector theta = initial_point(config.init, d, config.seed, c);
    ChainOutcome& out = result.chains[c];
    auto& records = per_chain[c];

    std::optional<AveragedOptimizer> averaged;
    if (config.averaging.enabled) {
      AveragingSettings s;
      s.patience = config.averaging.patience;
      s.min_delta = config.averaging.min_delta;
      averaged.emplace(*optimizer, s, config.averaging.epoch_length);
    }

    out.best_objective = kInfinity;
    auto record = [&](std::int64_t n, double grad_norm) {
      TrajectoryRecord r;
      r.chain = c;
      r.iteration = n;
      if (d <= kMaxRecordedCoordinates) r.theta = theta;
      r.theta_norm = norm2(theta);
      r.objective = all_finite(theta) ? problem->objective(theta) : kNaN;
      r.grad_norm = grad_norm;
      if (r.objective < out.best_objective) out.best_objective = r.objective;
      records.push_back(std::move(r));
    };

    record(0, kNaN);
    std::int64_t n = 1;
    for (; n <= config.steps; ++n) {
      const Sample s = problem->draw(data);
      ParamVector g = problem->stochastic_gradient(theta, s);
      if (!all_finite(g)) {
        out.diverged = true;
        break;
      }
      if (config.clip) g = clip_gradient(g, *config.clip);
      if (averaged) {
        averaged->step(theta, g);
      } else {
        optimizer->step(theta, g);
      }
      if (!all_finite(theta)) {
        out.diverged = true;
        record(n, norm2(g));
        break;
      }
      if (averaged && n % config.averaging.epoch_length == 0) {
        averaged->end_epoch(problem->objective(theta));
        const auto& st = averaged->state();
        if (st.triggered() && !config.averaging.noise_during_averaging)
          optimizer->set_noise_enabled(false);
      }
      if (n % config.record_every == 0 || n == config.steps) record(n, norm2(g));
    }
    out.steps_completed = out.diverged ? n - 1 : config.steps;
    out.final_iterate = theta;
    out.estimate = averaged ? averaged->estimate(theta) : theta;
    if (averaged) out.trigger_epoch = averaged->state().trigger_epoch();
    if (out.diverged) {
      out.final_objective = kInfinity;
      out.final_distance = kInfinity;
    } else {
      out.final_objective = problem->objective(out.estimate);
      if (optimum) {
        ParamVector diff(d);
        for (std::size_t i = 0; i < d; ++i) diff[i] = out.estimate[i] - optimum->point[i];
        out.final_distance = norm2(diff);
      } else {
        out.final_distance = kNaN;
      }
    }
  });

  for (auto& chain_records : per_chain)
    for (auto& r : chain_records) result.records.push_back(std::move(r));
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

json RunResult::summary() const {
  json chains_json = json::array();
  double sum_obj = 0.0, sum_dist = 0.0;
  for (const auto& c : chains) {
    json entry = {{"final_iterate_norm", json_number(norm2(c.final_iterate))},
                  {"final_objective", json_number(c.final_objective)},
                  {"best_objective", json_number(c.best_objective)},
                  {"final_distance", json_number(c.final_distance)},
                  {"diverged", c.diverged},
                  {"steps_completed", c.steps_completed},
                  {"trigger_epoch", c.trigger_epoch ? json(*c.trigger_epoch) : json(nullptr)}};
    if (c.final_iterate.size() <= kMaxRecordedCoordinates) {
      entry["final_iterate"] = vector_json(c.final_iterate);
      entry["estimate"] = vector_json(c.estimate);
    }
    chains_json.push_back(std::move(entry));
    sum_obj += c.final_objective;
    sum_dist += c.final_distance;
  }
  const auto n = static_cast<double>(chains.size());
  return json{{"schema_version", kSummarySchemaVersion},
              {"config_hash", config_hash},
              {"rng_algorithm", std::string(kRngAlgorithm)},
              {"problem", config.problem.name},
              {"optimizer", config.optimizer.name},
              {"steps", config.steps},
              {"wall_time_s", wall_time_s},
              {"chains", chains_json},
              {"mean_final_objective", json_number(sum_obj / n)},
              {"mean_final_distance", json_number(sum_dist / n)},
              {"config", config.to_json()}};
}

std::string trajectory_csv_header(std::size_t dimension) {
  std::string h = "chain,iteration,theta_norm,objective,grad_norm";
  if (dimension <= kMaxRecordedCoordinates)
    for (std::size_t i = 0; i < dimension; ++i) h += ",theta_" + std::to_string(i);
  return h;
}

std::string trajectory_csv(const RunResult& result) {
  const std::size_t d =
      result.chains.empty() ? 0 : result.chains.front().final_iterate.size();
  std::string out = trajectory_csv_header(d) + "\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.chain) + "," + std::to_string(r.iteration) + "," +
           format_double(r.theta_norm) + "," + format_double(r.objective) + "," +
           format_double(r.grad_norm);
    for (double v : r.theta) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

void write_run(const RunResult& result, bool force) {
  namespace fs = std::filesystem;
  const fs::path dir = result.config.out_dir;
  fs::create_directories(dir);
  const fs::path summary_path = dir / "summary.json";
  if (!force && fs::exists(summary_path)) {
    std::ifstream in(summary_path);
    const json old = json::parse(in, nullptr, false);
    const std::string old_hash =
        old.is_object() && old.contains("config_hash") ? old["config_hash"].get<std::string>() : "";
    if (old_hash != result.config_hash)
      throw std::runtime_error("refusing to overwrite outputs in '" + dir.string() +
                        "' produced by config " + old_hash + " (use --force)");
  }
  write_text(dir / "trajectory.csv", trajectory_csv(result));
  write_text(summary_path, result.summary().dump(2) + "\n");
}

CompareResult compare(const std::vector<ExperimentConfig>& configs, double tolerance) {
  if (configs.empty()) throw ConfigError("compare: no configs");
  const ExperimentConfig& ref = configs.front();
  const json ref_problem = ref.to_json()["problem"];
  const json ref_init = ref.to_json()["init"];
  for (const auto& c : configs) {
    const json doc = c.to_json();
    if (doc["problem"] != ref_problem) throw ConfigError("compare: arms use different problems");
    if (doc["init"] != ref_init) throw ConfigError("compare: arms use different initial points");
    if (c.steps != ref.steps || c.seed != ref.seed || c.chains != ref.chains ||
        c.record_every != ref.record_every)
      throw ConfigError("compare: arms must share steps, seed, chains and record_every");
  }

  CompareResult result;
  result.arms.resize(configs.size());
  parallel_for(configs.size(), ref.threads,
               [&](std::size_t i) { result.arms[i] = run(configs[i]); });

  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string label = arm_label(configs[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (result.labels[j] == label) label += "#" + std::to_string(i);
    result.labels.push_back(label);
  }

  // Chain 0 only: theta itself in one dimension, its norm otherwise.
  const bool scalar = make_problem(ref.problem)->dimension() == 1;
  std::vector<std::int64_t> iterations;
  for (const auto& r : result.arms.front().records)
    if (r.chain == 0) iterations.push_back(r.iteration);
  for (const auto& arm : result.arms) {
    std::vector<std::int64_t> its;
    for (const auto& r : arm.records)
      if (r.chain == 0) its.push_back(r.iteration);
    if (its.size() > iterations.size()) iterations = its;
  }
  std::ostringstream csv;
  csv << "iteration";
  for (const auto& l : result.labels) csv << "," << l;
  csv << "\n";
  std::vector<std::size_t> cursor(result.arms.size(), 0);
  for (std::int64_t it : iterations) {
    csv << it;
    for (std::size_t a = 0; a < result.arms.size(); ++a) {
      const auto& recs = result.arms[a].records;
      csv << ",";
      auto& k = cursor[a];
      while (k < recs.size() && recs[k].chain == 0 && recs[k].iteration < it) ++k;
      if (k < recs.size() && recs[k].chain == 0 && recs[k].iteration == it)
        csv << format_double(scalar ? recs[k].theta[0] : recs[k].theta_norm);
    }
    csv << "\n";
  }
  result.csv = csv.str();

  json arms = json::array();
  for (std::size_t a = 0; a < result.arms.size(); ++a) {
    const auto& p = result.arms[a].primary();
    arms.push_back({{"label", result.labels[a]},
                    {"optimizer", configs[a].optimizer.name},
                    {"lr", configs[a].optimizer.lr},
                    {"final_distance", json_number(p.final_distance)},
                    {"final_objective", json_number(p.final_objective)},
                    {"diverged", p.diverged},
                    {"reached_tolerance", p.final_distance < tolerance}});
  }
  result.verdict = {{"schema_version", kSummarySchemaVersion},
                    {"tolerance", tolerance},
                    {"steps", ref.steps},
                    {"seed", ref.seed},
                    {"arms", arms}};
  return result;
}

json AblationResult::to_json() const {
  json pairs_json = json::array();
  for (const auto& p : pairs)
    pairs_json.push_back({{"seed", p.seed},
                          {"boosted_loss", json_number(p.boosted_loss)},
                          {"unboosted_loss", json_number(p.unboosted_loss)}});
  return {{"schema_version", kSummarySchemaVersion},
          {"boost_floor", json_number(boost_floor)},
          {"pairs", pairs_json},
          {"mean_boosted_loss", json_number(mean_boosted)},
          {"mean_unboosted_loss", json_number(mean_unboosted)},
          {"boosted_wins", boosted_wins},
          {"replicates", pairs.size()}};
}

AblationResult ablate_boosting(const ExperimentConfig& config, std::size_t replicates) {
  if (config.optimizer.name != "theo_poula")
    throw ConfigError("ablate: optimizer must be theo_poula");
  if (replicates == 0) throw ConfigError("ablate: replicates must be >= 1");
  std::vector<ExperimentConfig> arms;
  for (std::size_t r = 0; r < replicates; ++r) {
    ExperimentConfig boosted = config;
    boosted.seed = config.seed + r;
    ExperimentConfig plain = boosted;
    plain.optimizer.boost_floor = kInfinity;
    arms.push_back(boosted);
    arms.push_back(plain);
  }
  std::vector<double> losses(arms.size());
  parallel_for(arms.size(), config.threads,
               [&](std::size_t i) { losses[i] = run(arms[i]).primary().final_objective; });

  AblationResult result;
  result.boost_floor = config.optimizer.boost_floor;
  for (std::size_t r = 0; r < replicates; ++r) {
    AblationPair p{arms[2 * r].seed, losses[2 * r], losses[2 * r + 1]};
    result.mean_boosted += p.boosted_loss;
    result.mean_unboosted += p.unboosted_loss;
    if (p.boosted_loss < p.unboosted_loss) ++result.boosted_wins;
    result.pairs.push_back(p);
  }
  result.mean_boosted /= static_cast<double>(replicates);
  result.mean_unboosted /= static_cast<double>(replicates);
  return result;
}

json SweepResult::to_json() const {
  json rows = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& p = runs[i].primary();
    rows.push_back({{"value", values[i]},
                    {"final_objective", json_number(p.final_objective)},
                    {"best_objective", json_number(p.best_objective)},
                    {"final_distance", json_number(p.final_distance)},
                    {"diverged", p.diverged},
                    {"config_hash", runs[i].config_hash}});
  }
  return {{"schema_version", kSummarySchemaVersion}, {"axis", axis}, {"rows", rows}};
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<json>& values) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    json doc = base.to_json();
    set_path(doc, axis, v);
    configs.push_back(ExperimentConfig::from_json(doc));
  }
  SweepResult result;
  result.axis = axis;
  result.values = values;
  result.runs.resize(configs.size());
  parallel_for(configs.size(), base.threads,
               [&](std::size_t i) { result.runs[i] = run(configs[i]); });

  std::ostringstream csv;
  csv << "value,final_objective,best_objective,final_distance,diverged\n";
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const auto& p = result.runs[i].primary();
    std::string v = values[i].is_string() ? values[i].get<std::string>() : values[i].dump();
    csv << v << "," << format_double(p.final_objective) << ","
        << format_double(p.best_objective) << "," << format_double(p.final_distance)
        << "," << (p.diverged ? 1 : 0) << "\n";
  }
  result.csv = csv.str();
  return result;
}

}  // namespace theo

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "theo/config.hpp"
#include "theo/optimizer.hpp"
#include "theo/problems.hpp"

namespace theo {

inline constexpr int kSummarySchemaVersion = 1;
/// Coordinates are written to the trajectory CSV only up to this dimension.
inline constexpr std::size_t kMaxRecordedCoordinates = 8;

/// Global-norm clipping: g * threshold / |g| when |g| > threshold.
ParamVector clip_gradient(std::span<const double> grad, double threshold);

std::shared_ptr<const Problem> make_problem(const ProblemConfig& config);
std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config,
                                          std::uint64_t noise_seed);
ParamVector initial_point(const InitConfig& init, std::size_t dimension,
                          std::uint64_t seed, std::size_t chain);

struct TrajectoryRecord {
  std::size_t chain = 0;
  std::int64_t iteration = 0;
  ParamVector theta;  ///< empty above kMaxRecordedCoordinates
  double theta_norm = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;  ///< of the gradient that produced this iterate; NaN at 0
};

struct ChainOutcome {
  ParamVector final_iterate;
  ParamVector estimate;  ///< averaged estimate, or the final iterate
  double final_objective = 0.0;
  double best_objective = 0.0;
  /// |estimate - theta*|; +inf after divergence, NaN without a known optimum.
  double final_distance = 0.0;
  bool diverged = false;
  std::int64_t steps_completed = 0;
  std::optional<std::int64_t> trigger_epoch;
};

struct RunResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<ChainOutcome> chains;
  std::vector<TrajectoryRecord> records;
  double wall_time_s = 0.0;

  nlohmann::json summary() const;
  const ChainOutcome& primary() const { return chains.front(); }
};

/// Executes the configured optimizer on the configured problem. Chain c uses
/// data seed derive_seed(seed, 2c) and noise seed derive_seed(seed, 2c + 1),
/// so every optimizer sees the same data stream for a given seed.
RunResult run(const ExperimentConfig& config);

/// Column order of trajectory.csv.
std::string trajectory_csv_header(std::size_t dimension);
std::string trajectory_csv(const RunResult& result);

/// Writes trajectory.csv and summary.json into config.out_dir. Refuses to
/// replace outputs from a different config unless `force`.
void write_run(const RunResult& result, bool force = false);

struct CompareResult {
  std::vector<RunResult> arms;
  std::vector<std::string> labels;
  std::string csv;  ///< iteration, one column per arm
  nlohmann::json verdict;
};

/// Runs every arm; all must share problem, initial point, step budget and
/// seed. `tolerance` marks arms whose final distance to the optimum is below it.
CompareResult compare(const std::vector<ExperimentConfig>& configs,
                      double tolerance = 0.1);

struct AblationPair {
  std::uint64_t seed = 0;
  double boosted_loss = 0.0;
  double unboosted_loss = 0.0;
};

struct AblationResult {
  double boost_floor = 0.0;
  std::vector<AblationPair> pairs;
  double mean_boosted = 0.0;
  double mean_unboosted = 0.0;
  std::size_t boosted_wins = 0;
  nlohmann::json to_json() const;
};

/// Matched runs of the configured boost floor against boost_floor = inf,
/// replicate r using seed config.seed + r. Loss is the final objective.
AblationResult ablate_boosting(const ExperimentConfig& config,
                               std::size_t replicates = 1);

struct SweepResult {
  std::string axis;
  std::vector<nlohmann::json> values;
  std::vector<RunResult> runs;
  std::string csv;
  nlohmann::json to_json() const;
};

/// One run per value of the dotted config path `axis`, in the given order.
SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<nlohmann::json>& values);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace theo

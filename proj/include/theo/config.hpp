#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "theo/problems.hpp"
#include "theo/theo_poula.hpp"

namespace theo {

/// Invalid or unknown configuration content.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProblemConfig {
  std::string name = "motivating";  ///< motivating | quadratic | mlp
  double curvature = 1.0;
  std::size_t dimension = 1;
  MlpSpec mlp;
};

struct OptimizerConfig {
  std::string name = "theo_poula";  ///< theo_poula | sgd | adam | amsgrad | rmsprop
  double lr = 0.01;
  // theo_poula
  double boost_floor = 0.1;
  double inverse_temperature = 1e12;
  double reg_strength = 0.0;
  int reg_exponent = 1;
  // adam / amsgrad
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool bias_correction = true;
  // sgd
  double momentum = 0.0;
  // rmsprop
  double alpha = 0.99;

  HyperParams hyper_params() const;
};

struct InitConfig {
  std::string kind = "explicit";  ///< explicit | gaussian | uniform
  ParamVector value{5.0};         ///< one entry is broadcast to every coordinate
  double scale = 1.0;
  double low = -1.0;
  double high = 1.0;
};

struct AveragingConfig {
  bool enabled = false;
  int patience = 5;
  double min_delta = 0.0;
  std::int64_t epoch_length = 100;  ///< iterations per "epoch"
  bool noise_during_averaging = true;
};

struct RateConfig {
  std::vector<double> step_sizes{0.1, 0.025, 0.00625};
  double diffusion_time = 10.0;
  double lo = -8.0;
  double hi = 8.0;
  std::size_t grid = std::size_t{1} << 14;
  bool init_from_oracle = false;
};

struct ExperimentConfig {
  std::string label;
  ProblemConfig problem;
  OptimizerConfig optimizer;
  InitConfig init;
  std::uint64_t seed = 1;
  std::int64_t steps = 10000;
  std::size_t chains = 1;
  std::int64_t record_every = 1;
  AveragingConfig averaging;
  std::optional<double> clip;
  RateConfig rate;
  std::string out_dir = "out";
  unsigned threads = 0;

  /// Throws ConfigError naming the violated bound.
  void validate() const;

  /// Full canonical form: every field present, keys sorted.
  nlohmann::json to_json() const;

  /// Reads a (partial) JSON document over the defaults. Unknown keys are
  /// rejected. Infinite values may be written as the string "inf".
  static ExperimentConfig from_json(const nlohmann::json& doc);

  /// FNV-1a 64 of the canonical JSON without out_dir and threads, as hex.
  std::string hash() const;
};

/// Applies `path=value` (dotted path, value parsed as JSON or else taken as a
/// string). The path must name an existing field.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Sets a dotted path in a canonical config document; throws ConfigError if
/// the path does not name an existing field.
void set_path(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);

ExperimentConfig load_config(const std::string& file,
                             const std::vector<std::string>& overrides);

/// Finite doubles as numbers, infinities and NaN as "inf" / "-inf" / "nan".
nlohmann::json json_number(double v);
double number_from_json(const nlohmann::json& v, const std::string& field);

}  // namespace theo

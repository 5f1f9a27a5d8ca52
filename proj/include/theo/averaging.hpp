#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "theo/optimizer.hpp"
#include "theo/vector_ops.hpp"

namespace theo {

struct AveragingSettings {
  int patience = 5;
  double min_delta = 0.0;   ///< improvement must exceed this margin
  bool minimize = true;
};

/// Patience-triggered Polyak averaging.
///
/// Validation metrics arrive once per epoch. When the metric has failed to
/// improve for `patience` consecutive epochs the trigger K is set to the next
/// epoch, and from then on the caller feeds every iterate to accumulate().
/// The estimate is then the mean of theta_K .. theta_n.
class AveragingState {
 public:
  explicit AveragingState(AveragingSettings settings = {});

  /// Epochs must be strictly increasing; throws std::invalid_argument otherwise.
  void observe_metric(std::int64_t epoch, double metric);

  /// Returns false (and sets warned()) when called before the trigger.
  bool accumulate(std::span<const double> theta);

  /// The last iterate before the trigger, the running mean after it.
  ParamVector current_estimate(std::span<const double> theta_last) const;

  bool triggered() const { return trigger_epoch_.has_value(); }
  std::optional<std::int64_t> trigger_epoch() const { return trigger_epoch_; }
  std::uint64_t count() const { return count_; }
  const ParamVector& running_mean() const { return mean_; }
  double best_metric() const { return best_; }
  int epochs_since_best() const { return since_best_; }
  bool warned() const { return warned_; }
  const AveragingSettings& settings() const { return settings_; }

 private:
  AveragingSettings settings_;
  std::optional<std::int64_t> trigger_epoch_;
  std::optional<std::int64_t> last_epoch_;
  double best_;
  int since_best_ = 0;
  std::uint64_t count_ = 0;
  ParamVector mean_;
  ParamVector compensation_;
  bool warned_ = false;
};

/// Runs any optimizer unchanged and tracks the averaged estimate alongside.
/// Only const access to the inner optimizer is exposed, so its learning rate
/// stays constant for the whole run.
class AveragedOptimizer {
 public:
  AveragedOptimizer(Optimizer& inner, AveragingSettings settings,
                    std::int64_t epoch_length);

  /// One inner step; accumulates the new iterate if its epoch >= K.
  void step(ParamVector& theta, std::span<const double> grad);

  /// Call at the end of each epoch with the validation metric.
  void end_epoch(double metric);

  std::int64_t iteration() const { return iteration_; }
  std::int64_t epoch() const { return iteration_ / epoch_length_; }
  const AveragingState& state() const { return state_; }
  const Optimizer& inner() const { return inner_; }
  ParamVector estimate(std::span<const double> theta_last) const {
    return state_.current_estimate(theta_last);
  }

 private:
  Optimizer& inner_;
  AveragingState state_;
  std::int64_t epoch_length_;
  std::int64_t iteration_ = 0;
};

}  // namespace theo

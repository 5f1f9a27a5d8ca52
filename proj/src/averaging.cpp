#include "theo/averaging.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace theo {

AveragingState::AveragingState(AveragingSettings settings)
    : settings_(settings),
      best_(settings.minimize ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity()) {
  if (settings_.patience < 1)
    throw std::invalid_argument("averaging: patience must be >= 1");
  if (!(settings_.min_delta >= 0.0))
    throw std::invalid_argument("averaging: min_delta must be >= 0");
}

void AveragingState::observe_metric(std::int64_t epoch, double metric) {
  if (last_epoch_ && epoch <= *last_epoch_)
    throw std::invalid_argument("averaging: epoch " + std::to_string(epoch) +
                                " observed after epoch " +
                                std::to_string(*last_epoch_));
  const bool first = !last_epoch_.has_value();
  last_epoch_ = epoch;
  const bool improved =
      first || (settings_.minimize ? metric < best_ - settings_.min_delta
                                   : metric > best_ + settings_.min_delta);
  if (improved) {
    best_ = metric;
    since_best_ = 0;
    return;
  }
  if (triggered()) return;
  ++since_best_;
  if (since_best_ >= settings_.patience) trigger_epoch_ = epoch + 1;
}

bool AveragingState::accumulate(std::span<const double> theta) {
  if (!triggered()) {
    warned_ = true;
    return false;
  }
  require_finite(theta, "averaging");
  if (count_ == 0) {
    mean_.assign(theta.begin(), theta.end());
    compensation_.assign(theta.size(), 0.0);
    count_ = 1;
    return true;
  }
  require_same_dim(theta.size(), mean_.size(), "averaging");
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  // mean += (theta - mean) / n with Kahan compensation of the increments.
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double inc = (theta[i] - mean_[i]) * inv - compensation_[i];
    const double updated = mean_[i] + inc;
    compensation_[i] = (updated - mean_[i]) - inc;
    mean_[i] = updated;
  }
  return true;
}

ParamVector AveragingState::current_estimate(std::span<const double> theta_last) const {
  if (count_ == 0) return ParamVector(theta_last.begin(), theta_last.end());
  return mean_;
}

AveragedOptimizer::AveragedOptimizer(Optimizer& inner, AveragingSettings settings,
                                     std::int64_t epoch_length)
    : inner_(inner), state_(settings), epoch_length_(epoch_length) {
  if (epoch_length < 1)
    throw std::invalid_argument("averaging: epoch_length must be >= 1");
}

void AveragedOptimizer::step(ParamVector& theta, std::span<const double> grad) {
  inner_.step(theta, grad);
  ++iteration_;
  // theta now is iterate number iteration_, which belongs to epoch
  // (iteration_ - 1) / epoch_length_ counted from zero.
  const std::int64_t current_epoch = (iteration_ - 1) / epoch_length_;
  if (state_.triggered() && current_epoch >= *state_.trigger_epoch())
    state_.accumulate(theta);
}

void AveragedOptimizer::end_epoch(double metric) {
  state_.observe_metric((iteration_ - 1) / epoch_length_, metric);
}

}  // namespace theo

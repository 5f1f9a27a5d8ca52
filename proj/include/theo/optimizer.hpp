#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "theo/baselines.hpp"
#include "theo/random.hpp"
#include "theo/theo_poula.hpp"

namespace theo {

/// Stateful optimizer used by the experiment harness. Implementations wrap
/// the pure step functions and own their moment buffers and noise stream.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual std::string_view name() const = 0;
  virtual double learning_rate() const = 0;

  /// Replaces theta with the next iterate given the stochastic gradient.
  virtual void step(ParamVector& theta, std::span<const double> grad) = 0;

  /// Turns the injected Gaussian noise off (no-op for noiseless methods).
  virtual void set_noise_enabled(bool) {}
};

class TheoPoulaOptimizer final : public Optimizer {
 public:
  TheoPoulaOptimizer(HyperParams hp, std::uint64_t noise_seed);

  std::string_view name() const override { return "theo_poula"; }
  double learning_rate() const override { return hp_.step_size; }
  void step(ParamVector& theta, std::span<const double> grad) override;
  void set_noise_enabled(bool on) override { noise_on_ = on; }

  const HyperParams& hyper_params() const { return hp_; }

 private:
  HyperParams hp_;
  NoiseSource noise_;
  bool noise_on_ = true;
};

class SgdOptimizer final : public Optimizer {
 public:
  SgdOptimizer(double lr, double momentum);
  std::string_view name() const override { return "sgd"; }
  double learning_rate() const override { return lr_; }
  void step(ParamVector& theta, std::span<const double> grad) override;

 private:
  double lr_;
  MomentumState state_;
};

class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(double lr, AdamState init);
  std::string_view name() const override { return "adam"; }
  double learning_rate() const override { return lr_; }
  void step(ParamVector& theta, std::span<const double> grad) override;

 private:
  double lr_;
  AdamState state_;
};

class AmsGradOptimizer final : public Optimizer {
 public:
  AmsGradOptimizer(double lr, AdamState init);
  std::string_view name() const override { return "amsgrad"; }
  double learning_rate() const override { return lr_; }
  void step(ParamVector& theta, std::span<const double> grad) override;

 private:
  double lr_;
  AmsGradState state_;
};

class RmsPropOptimizer final : public Optimizer {
 public:
  RmsPropOptimizer(double lr, RmsPropState init);
  std::string_view name() const override { return "rmsprop"; }
  double learning_rate() const override { return lr_; }
  void step(ParamVector& theta, std::span<const double> grad) override;

 private:
  double lr_;
  RmsPropState state_;
};

}  // namespace theo

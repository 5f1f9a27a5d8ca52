#include "theo/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace theo {
namespace {

void check_lr(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw std::invalid_argument("learning rate must be finite and > 0");
}

}  // namespace

TheoPoulaOptimizer::TheoPoulaOptimizer(HyperParams hp, std::uint64_t noise_seed)
    : hp_(hp), noise_(noise_seed) {
  hp_.validate();
}

void TheoPoulaOptimizer::step(ParamVector& theta, std::span<const double> grad) {
  if (noise_on_) {
    theta = theo_poula_step(theta, grad, hp_, noise_);
    return;
  }
  HyperParams quiet = hp_;
  quiet.inverse_temperature = kInfinity;
  theta = theo_poula_step(theta, grad, quiet, noise_);
}

SgdOptimizer::SgdOptimizer(double lr, double momentum) : lr_(lr) {
  check_lr(lr);
  state_.momentum = momentum;
}

void SgdOptimizer::step(ParamVector& theta, std::span<const double> grad) {
  theta = sgd_step(theta, grad, lr_, state_);
}

AdamOptimizer::AdamOptimizer(double lr, AdamState init)
    : lr_(lr), state_(std::move(init)) {
  check_lr(lr);
}

void AdamOptimizer::step(ParamVector& theta, std::span<const double> grad) {
  theta = adam_step(theta, grad, lr_, state_);
}

AmsGradOptimizer::AmsGradOptimizer(double lr, AdamState init) : lr_(lr) {
  check_lr(lr);
  state_.adam = std::move(init);
}

void AmsGradOptimizer::step(ParamVector& theta, std::span<const double> grad) {
  theta = amsgrad_step(theta, grad, lr_, state_);
}

RmsPropOptimizer::RmsPropOptimizer(double lr, RmsPropState init)
    : lr_(lr), state_(std::move(init)) {
  check_lr(lr);
}

void RmsPropOptimizer::step(ParamVector& theta, std::span<const double> grad) {
  theta = rmsprop_step(theta, grad, lr_, state_);
}

}  // namespace theo

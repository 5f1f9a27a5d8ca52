#include <cmath>
#include <stdexcept>

#include "theo/problems.hpp"

namespace theo {
namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kLinear: return z;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
  }
  return z;
}

// Derivative expressed through the activated value where possible.
double activate_grad(Activation a, double z, double out) {
  switch (a) {
    case Activation::kLinear: return 1.0;
    case Activation::kTanh: return 1.0 - out * out;
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

std::size_t MlpProblem::parameter_count(std::span<const std::size_t> layers) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    count += layers[l + 1] * (layers[l] + 1);
  return count;
}

void MlpProblem::validate_layers() const {
  if (layers_.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output layers");
  for (std::size_t w : layers_)
    if (w == 0) throw std::invalid_argument("mlp: layer widths must be >= 1");
  if (parameter_count(layers_) > kMaxMlpParameters)
    throw std::invalid_argument("mlp: parameter count exceeds 100000");
  if (batch_size_ == 0) throw std::invalid_argument("mlp: batch_size must be >= 1");
}

MlpProblem::MlpProblem(const MlpSpec& spec)
    : layers_(spec.layers), activation_(spec.activation),
      batch_size_(spec.batch_size) {
  validate_layers();
  if (spec.dataset_size == 0)
    throw std::invalid_argument("mlp: dataset_size must be >= 1");
  if (!(spec.label_noise >= 0.0))
    throw std::invalid_argument("mlp: label_noise must be >= 0");
  param_count_ = parameter_count(layers_);

  RandomStream rng(derive_seed(spec.seed, 0x7eac4e2));
  teacher_.resize(param_count_);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const std::size_t fan_in = layers_[l];
    const double w_scale = spec.teacher_scale / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t k = 0; k < layers_[l + 1] * fan_in; ++k)
      teacher_[offset++] = w_scale * rng.normal();
    for (std::size_t k = 0; k < layers_[l + 1]; ++k)
      teacher_[offset++] = 0.1 * spec.teacher_scale * rng.normal();
  }

  inputs_.resize(spec.dataset_size * in_dim());
  for (double& v : inputs_) v = rng.normal();
  targets_.assign(spec.dataset_size * out_dim(), 0.0);
  // Targets start as teacher outputs; batch_size_ is irrelevant here.
  for (std::size_t n = 0; n < spec.dataset_size; ++n) {
    std::vector<double> act(inputs_.begin() + n * in_dim(),
                            inputs_.begin() + (n + 1) * in_dim());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      const std::size_t fi = layers_[l], fo = layers_[l + 1];
      std::vector<double> next(fo);
      for (std::size_t o = 0; o < fo; ++o) {
        double z = teacher_[off + fo * fi + o];
        for (std::size_t i = 0; i < fi; ++i) z += teacher_[off + o * fi + i] * act[i];
        next[o] = (l + 2 == layers_.size()) ? z : activate(activation_, z);
      }
      off += fo * (fi + 1);
      act = std::move(next);
    }
    for (std::size_t o = 0; o < out_dim(); ++o)
      targets_[n * out_dim() + o] = act[o] + spec.label_noise * rng.normal();
  }
}

MlpProblem::MlpProblem(std::vector<std::size_t> layers, Activation activation,
                       std::vector<double> inputs, std::vector<double> targets,
                       std::size_t batch_size)
    : layers_(std::move(layers)), activation_(activation),
      batch_size_(batch_size), inputs_(std::move(inputs)),
      targets_(std::move(targets)) {
  validate_layers();
  param_count_ = parameter_count(layers_);
  if (inputs_.empty() || inputs_.size() % in_dim() != 0 ||
      targets_.size() % out_dim() != 0 ||
      inputs_.size() / in_dim() != targets_.size() / out_dim())
    throw std::invalid_argument("mlp: inputs/targets do not match layer widths");
  teacher_.assign(param_count_, 0.0);
}

Sample MlpProblem::draw(RandomStream& data) const {
  Sample s;
  s.batch.resize(batch_size_);
  for (auto& idx : s.batch) idx = data.below(dataset_size());
  return s;
}

Sample MlpProblem::full_batch() const {
  Sample s;
  s.batch.resize(dataset_size());
  for (std::size_t i = 0; i < s.batch.size(); ++i) s.batch[i] = i;
  return s;
}

double MlpProblem::loss_and_gradient(std::span<const double> theta,
                                     std::span<const std::size_t> indices,
                                     ParamVector* grad) const {
  require_same_dim(theta.size(), param_count_, "mlp");
  if (indices.empty()) throw std::invalid_argument("mlp: empty batch");
  const std::size_t depth = layers_.size() - 1;
  if (grad) grad->assign(param_count_, 0.0);

  std::vector<std::size_t> offsets(depth);
  for (std::size_t l = 0, off = 0; l < depth; ++l) {
    offsets[l] = off;
    off += layers_[l + 1] * (layers_[l] + 1);
  }

  // acts[l] is the input to layer l; pre[l] its pre-activation output.
  std::vector<std::vector<double>> acts(depth + 1), pre(depth);
  std::vector<double> delta, prev_delta;
  double total = 0.0;
  const double inv_b = 1.0 / static_cast<double>(indices.size());

  for (std::size_t idx : indices) {
    if (idx >= dataset_size()) throw std::out_of_range("mlp: batch index");
    acts[0].assign(inputs_.begin() + idx * in_dim(),
                   inputs_.begin() + (idx + 1) * in_dim());
    for (std::size_t l = 0; l < depth; ++l) {
      const std::size_t fi = layers_[l], fo = layers_[l + 1];
      const double* w = theta.data() + offsets[l];
      const double* b = w + fo * fi;
      pre[l].resize(fo);
      acts[l + 1].resize(fo);
      for (std::size_t o = 0; o < fo; ++o) {
        double z = b[o];
        for (std::size_t i = 0; i < fi; ++i) z += w[o * fi + i] * acts[l][i];
        pre[l][o] = z;
        acts[l + 1][o] = (l + 1 == depth) ? z : activate(activation_, z);
      }
    }
    delta.resize(out_dim());
    for (std::size_t o = 0; o < out_dim(); ++o) {
      const double r = acts[depth][o] - targets_[idx * out_dim() + o];
      total += 0.5 * r * r;
      delta[o] = r * inv_b;
    }
    if (!grad) continue;
    for (std::size_t l = depth; l-- > 0;) {
      const std::size_t fi = layers_[l], fo = layers_[l + 1];
      const double* w = theta.data() + offsets[l];
      double* gw = grad->data() + offsets[l];
      double* gb = gw + fo * fi;
      for (std::size_t o = 0; o < fo; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < fi; ++i) gw[o * fi + i] += delta[o] * acts[l][i];
      }
      if (l == 0) break;
      prev_delta.assign(fi, 0.0);
      for (std::size_t o = 0; o < fo; ++o)
        for (std::size_t i = 0; i < fi; ++i) prev_delta[i] += w[o * fi + i] * delta[o];
      for (std::size_t i = 0; i < fi; ++i)
        prev_delta[i] *= activate_grad(activation_, pre[l - 1][i], acts[l][i]);
      delta.swap(prev_delta);
    }
  }
  return total * inv_b;
}

ParamVector MlpProblem::stochastic_gradient(std::span<const double> theta,
                                            const Sample& sample) const {
  ParamVector g;
  loss_and_gradient(theta, sample.batch, &g);
  return g;
}

double MlpProblem::sample_objective(std::span<const double> theta,
                                    const Sample& sample) const {
  return loss_and_gradient(theta, sample.batch, nullptr);
}

double MlpProblem::objective(std::span<const double> theta) const {
  const Sample all = full_batch();
  return loss_and_gradient(theta, all.batch, nullptr);
}

ParamVector MlpProblem::expected_gradient(std::span<const double> theta) const {
  const Sample all = full_batch();
  ParamVector g;
  loss_and_gradient(theta, all.batch, &g);
  return g;
}

}  // namespace theo

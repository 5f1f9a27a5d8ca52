#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "theo/random.hpp"
#include "theo/vector_ops.hpp"

namespace theo {

/// One draw of data X_{n+1}. Scalar-data problems fill `x`; mini-batch
/// problems fill `batch` with dataset indices.
struct Sample {
  std::vector<double> x;
  std::vector<std::size_t> batch;
};

struct Optimum {
  ParamVector point;
  double value = 0.0;
};

/// Gradient-oracle contract. Problems are immutable after construction and
/// may be shared between threads; all randomness comes from the caller's
/// RandomStream.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;

  virtual Sample draw(RandomStream& data) const = 0;

  /// G(theta, x). May overflow to +-inf when the true value exceeds the
  /// double range; callers treat that as divergence.
  virtual ParamVector stochastic_gradient(std::span<const double> theta,
                                          const Sample& sample) const = 0;

  /// F(theta, x), the per-sample loss whose gradient is stochastic_gradient.
  virtual double sample_objective(std::span<const double> theta,
                                  const Sample& sample) const = 0;

  /// u(theta) = E[F(theta, X)].
  virtual double objective(std::span<const double> theta) const = 0;

  /// False when objective() is itself a Monte-Carlo estimate.
  virtual bool objective_exact() const { return true; }

  /// grad u(theta) = E[G(theta, X)].
  virtual ParamVector expected_gradient(std::span<const double> theta) const = 0;

  virtual std::optional<Optimum> optimum() const { return std::nullopt; }

  /// Declared growth exponent q of the gradient, when known. Informational:
  /// regularized runs should use reg_exponent >= q/2 + 1, which is not enforced.
  virtual std::optional<int> growth_exponent() const { return std::nullopt; }

  /// Suggested box for random probe points (finite-difference checks etc.).
  virtual double probe_radius() const { return 1.0; }
};

// Scalar closed forms of the one-dimensional motivating example, where
// X ~ Uniform(-2, 2) and the loss weight doubles when X <= 1.
double motivating_gradient(double theta, double x);
double motivating_sample_objective(double theta, double x);
double motivating_objective(double theta);
double motivating_true_gradient(double theta);

class MotivatingProblem final : public Problem {
 public:
  std::string name() const override { return "motivating"; }
  std::size_t dimension() const override { return 1; }
  /// Uniform on the half-open interval [-2, 2).
  Sample draw(RandomStream& data) const override;
  ParamVector stochastic_gradient(std::span<const double> theta,
                                  const Sample& sample) const override;
  double sample_objective(std::span<const double> theta,
                          const Sample& sample) const override;
  double objective(std::span<const double> theta) const override;
  ParamVector expected_gradient(std::span<const double> theta) const override;
  std::optional<Optimum> optimum() const override;
  std::optional<int> growth_exponent() const override { return 29; }
  double probe_radius() const override { return 2.0; }
};

/// u(theta) = a |theta|^2 / 2 with an exact, deterministic gradient.
class QuadraticProblem final : public Problem {
 public:
  explicit QuadraticProblem(double curvature, std::size_t dimension = 1);

  std::string name() const override { return "quadratic"; }
  std::size_t dimension() const override { return dim_; }
  /// Consumes no randomness.
  Sample draw(RandomStream&) const override { return {}; }
  ParamVector stochastic_gradient(std::span<const double> theta,
                                  const Sample& sample) const override;
  double sample_objective(std::span<const double> theta,
                          const Sample&) const override {
    return objective(theta);
  }
  double objective(std::span<const double> theta) const override;
  ParamVector expected_gradient(std::span<const double> theta) const override;
  std::optional<Optimum> optimum() const override;
  std::optional<int> growth_exponent() const override { return 1; }
  double probe_radius() const override { return 3.0; }

  double curvature() const { return curvature_; }

 private:
  double curvature_;
  std::size_t dim_;
};

enum class Activation { kLinear, kTanh, kRelu };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct MlpSpec {
  std::vector<std::size_t> layers{4, 16, 1};  ///< input, hidden..., output
  Activation activation = Activation::kTanh;  ///< hidden layers; output is linear
  std::size_t dataset_size = 256;
  double label_noise = 0.1;
  std::size_t batch_size = 16;
  double teacher_scale = 1.0;
  std::uint64_t seed = 7;
};

inline constexpr std::size_t kMaxMlpParameters = 100000;

/// Teacher-student regression with a fully connected network and
/// mini-batch squared loss (1/B) sum_b 0.5 |f(x_b) - y_b|^2. Parameters are
/// laid out layer by layer as the row-major weight matrix then the bias.
class MlpProblem final : public Problem {
 public:
  /// Dataset drawn from a random teacher of the same architecture plus
  /// Gaussian label noise, all from `spec.seed`.
  explicit MlpProblem(const MlpSpec& spec);

  /// Explicit dataset; inputs and targets are row-major per example.
  MlpProblem(std::vector<std::size_t> layers, Activation activation,
             std::vector<double> inputs, std::vector<double> targets,
             std::size_t batch_size);

  std::string name() const override { return "mlp"; }
  std::size_t dimension() const override { return param_count_; }
  Sample draw(RandomStream& data) const override;
  ParamVector stochastic_gradient(std::span<const double> theta,
                                  const Sample& sample) const override;
  double sample_objective(std::span<const double> theta,
                          const Sample& sample) const override;
  double objective(std::span<const double> theta) const override;
  ParamVector expected_gradient(std::span<const double> theta) const override;

  std::size_t dataset_size() const { return targets_.size() / out_dim(); }
  const ParamVector& teacher() const { return teacher_; }
  /// Training loss of the teacher itself; the noise floor of the task.
  double teacher_loss() const { return objective(teacher_); }

  /// Loss and gradient over the given dataset indices.
  double loss_and_gradient(std::span<const double> theta,
                           std::span<const std::size_t> indices,
                           ParamVector* grad) const;

  /// Every index once; the full-batch sample.
  Sample full_batch() const;

  static std::size_t parameter_count(std::span<const std::size_t> layers);

 private:
  void validate_layers() const;
  std::size_t in_dim() const { return layers_.front(); }
  std::size_t out_dim() const { return layers_.back(); }

  std::vector<std::size_t> layers_;
  Activation activation_;
  std::size_t batch_size_;
  std::size_t param_count_ = 0;
  std::vector<double> inputs_;
  std::vector<double> targets_;
  ParamVector teacher_;
};

/// The problems every gradient-integrity check runs over.
std::vector<std::shared_ptr<const Problem>> builtin_problems();

}  // namespace theo

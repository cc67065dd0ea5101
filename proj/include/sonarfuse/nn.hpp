#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sonarfuse::nn {

/// Dense row-major array of doubles with an explicit shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// ---- parameters ----------------------------------------------------------------

/// A named, mutable window onto a parameter (or gradient) buffer.
struct ParamView {
  std::string name;
  std::span<double> values;
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weight;  // outputs x inputs, row-major
  std::vector<double> bias;    // outputs
};

/// Fully connected network; ReLU after every layer except the last.
struct MlpParams {
  std::vector<DenseLayer> layers;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static MlpParams init(std::span<const std::size_t> dims, std::mt19937_64& rng);
  static MlpParams zeros_like(const MlpParams& other);

  std::size_t input_dim() const { return layers.front().inputs; }
  std::size_t output_dim() const { return layers.back().outputs; }
  void validate() const;
  void append_views(const std::string& prefix, std::vector<ParamView>& out);
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization of a bias-free matrix.
std::vector<double> init_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

// ---- MLP -------------------------------------------------------------------------

/// Per-layer inputs and pre-activations from a forward pass, batched row-major.
struct MlpCache {
  std::size_t batch = 0;
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre_activations;
};

/// Input of shape [in] or [batch, in]; output keeps the same rank.
Tensor mlp_forward(const MlpParams& params, const Tensor& input, MlpCache* cache = nullptr);

struct MlpBackward {
  MlpParams param_grads;
  Tensor input_grad;
};

MlpBackward mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor& upstream);

struct MlpValueAndGrad {
  Tensor output;
  MlpParams param_grads;
  Tensor input_grad;
};

/// Forward pass plus reverse-mode gradients for a scalar loss whose gradient w.r.t.
/// the output is `upstream` (same shape as the output).
MlpValueAndGrad mlp_value_and_grad(const MlpParams& params, const Tensor& input, const Tensor& upstream);

// ---- losses -------------------------------------------------------------------------

struct ScalarAndGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// -log softmax(logits)[target]; gradient softmax - onehot.
ScalarAndGrad softmax_cross_entropy(std::span<const double> logits, std::size_t target);

/// -sum w ln w with 0 ln 0 = 0; gradient -(ln w + 1), +inf where w = 0.
ScalarAndGrad attention_entropy(std::span<const double> weights);

double sigmoid(double x);

// ---- squeeze-and-excitation ------------------------------------------------------------

struct SeGateParams {
  std::size_t channels = 0;
  std::size_t reduced = 0;
  std::vector<double> w1;  // reduced x channels
  std::vector<double> w2;  // channels x reduced

  static SeGateParams init(std::size_t channels, std::size_t reduction, std::mt19937_64& rng);
  static SeGateParams zeros_like(const SeGateParams& other);
  void validate() const;
  void append_views(const std::string& prefix, std::vector<ParamView>& out);
};

struct SeCache {
  std::vector<double> squeezed;  // s_c
  std::vector<double> hidden_pre;
  std::vector<double> gates;     // alpha_c
  Tensor input;
};

/// s_c = spatial mean of channel c; alpha = sigmoid(W2 relu(W1 s)); out_c = alpha_c * in_c.
/// featureMap has shape [C, H, W].
Tensor se_gate(const Tensor& feature_map, const SeGateParams& params, SeCache* cache = nullptr);

struct SeBackward {
  SeGateParams param_grads;
  Tensor input_grad;
};

SeBackward se_gate_backward(const SeGateParams& params, const SeCache& cache, const Tensor& upstream);

// ---- optimization -------------------------------------------------------------------

struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// Bias-corrected Adam update of every view in `params` from the matching view in `grads`.
/// Throws DomainError naming the parameter when a gradient is not finite.
void adam_step(AdamState& state, std::span<ParamView> params, std::span<const ParamView> grads);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = true;
};

inline constexpr double kGradCheckStep = 1e-5;
/// Denominator floor of the relative error, so that vanishing gradients are compared absolutely.
inline constexpr double kGradCheckFloor = 1e-3;

/// Central differences of `loss` over every entry of `params` versus `analytic`.
/// relative error = |a - n| / max(|a|, |n|, kGradCheckFloor).
GradCheckReport finite_difference_check(const std::function<double()>& loss, std::span<ParamView> params,
                                        std::span<const ParamView> analytic, double tolerance,
                                        double step = kGradCheckStep);

}  // namespace sonarfuse::nn

#include "sonarfuse/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sonarfuse/error.hpp"

namespace sonarfuse::nn {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  data_.assign(n, fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  require(n == data_.size(), "Tensor: data length does not match shape");
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

// ---- parameters ----------------------------------------------------------------

std::vector<double> init_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> m(rows * cols);
  for (double& v : m) v = u(rng);
  return m;
}

MlpParams MlpParams::init(std::span<const std::size_t> dims, std::mt19937_64& rng) {
  require(dims.size() >= 2, "MlpParams::init: need at least input and output dimensions");
  MlpParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer layer;
    layer.inputs = dims[i];
    layer.outputs = dims[i + 1];
    layer.weight = init_matrix(layer.outputs, layer.inputs, rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    std::uniform_real_distribution<double> u(-bound, bound);
    layer.bias.resize(layer.outputs);
    for (double& b : layer.bias) b = u(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams MlpParams::zeros_like(const MlpParams& other) {
  MlpParams p = other;
  for (auto& layer : p.layers) {
    std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return p;
}

void MlpParams::validate() const {
  require(!layers.empty(), "MLP: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    require(l.weight.size() == l.inputs * l.outputs && l.bias.size() == l.outputs, "MLP: layer buffer size mismatch");
    if (i > 0) require(layers[i - 1].outputs == l.inputs, "MLP: layer dimensions do not chain");
  }
}

void MlpParams::append_views(const std::string& prefix, std::vector<ParamView>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back({prefix + ".layers[" + std::to_string(i) + "].weight", layers[i].weight});
    out.push_back({prefix + ".layers[" + std::to_string(i) + "].bias", layers[i].bias});
  }
}

// ---- MLP -------------------------------------------------------------------------

namespace {

std::size_t batch_of(const Tensor& t, std::size_t features, const char* what) {
  if (t.rank() == 1) {
    require(t.dim(0) == features, std::string(what) + ": feature dimension mismatch");
    return 1;
  }
  require(t.rank() == 2 && t.dim(1) == features, std::string(what) + ": expected shape [batch, features]");
  return t.dim(0);
}

Tensor shaped_like_rank(std::size_t rank, std::size_t batch, std::size_t features, std::vector<double> data) {
  if (rank == 1) return Tensor({features}, std::move(data));
  return Tensor({batch, features}, std::move(data));
}

}  // namespace

Tensor mlp_forward(const MlpParams& params, const Tensor& input, MlpCache* cache) {
  params.validate();
  const std::size_t batch = batch_of(input, params.input_dim(), "mlp_forward");
  std::vector<double> act(input.data().begin(), input.data().end());
  if (cache) {
    cache->batch = batch;
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const DenseLayer& layer = params.layers[li];
    std::vector<double> pre(batch * layer.outputs);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = act.data() + b * layer.inputs;
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* w = layer.weight.data() + o * layer.inputs;
        double sum = layer.bias[o];
        for (std::size_t i = 0; i < layer.inputs; ++i) sum += w[i] * x[i];
        pre[b * layer.outputs + o] = sum;
      }
    }
    const bool last = li + 1 == params.layers.size();
    std::vector<double> out = pre;
    if (!last)
      for (double& v : out) v = std::max(v, 0.0);
    if (cache) {
      cache->inputs.push_back(std::move(act));
      cache->pre_activations.push_back(std::move(pre));
    }
    act = std::move(out);
  }
  return shaped_like_rank(input.rank(), batch, params.output_dim(), std::move(act));
}

MlpBackward mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor& upstream) {
  require(cache.inputs.size() == params.layers.size(), "mlp_backward: cache does not match parameters");
  const std::size_t batch = batch_of(upstream, params.output_dim(), "mlp_backward");
  require(batch == cache.batch, "mlp_backward: upstream batch does not match cache");
  MlpBackward result{MlpParams::zeros_like(params), {}};
  std::vector<double> grad(upstream.data().begin(), upstream.data().end());
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const DenseLayer& layer = params.layers[li];
    DenseLayer& g = result.param_grads.layers[li];
    const bool last = li + 1 == params.layers.size();
    if (!last) {
      const auto& pre = cache.pre_activations[li];
      for (std::size_t i = 0; i < grad.size(); ++i)
        if (pre[i] <= 0.0) grad[i] = 0.0;
    }
    const auto& x = cache.inputs[li];
    std::vector<double> down(batch * layer.inputs, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double go = grad[b * layer.outputs + o];
        if (go == 0.0) continue;
        g.bias[o] += go;
        double* gw = g.weight.data() + o * layer.inputs;
        const double* w = layer.weight.data() + o * layer.inputs;
        const double* xi = x.data() + b * layer.inputs;
        double* d = down.data() + b * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) {
          gw[i] += go * xi[i];
          d[i] += go * w[i];
        }
      }
    }
    grad = std::move(down);
  }
  result.input_grad = shaped_like_rank(upstream.rank(), batch, params.input_dim(), std::move(grad));
  return result;
}

MlpValueAndGrad mlp_value_and_grad(const MlpParams& params, const Tensor& input, const Tensor& upstream) {
  MlpCache cache;
  Tensor output = mlp_forward(params, input, &cache);
  require(upstream.shape() == output.shape(), "mlp_value_and_grad: upstream shape must match output");
  MlpBackward back = mlp_backward(params, cache, upstream);
  return {std::move(output), std::move(back.param_grads), std::move(back.input_grad)};
}

// ---- losses -------------------------------------------------------------------------

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax: empty logits");
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

ScalarAndGrad softmax_cross_entropy(std::span<const double> logits, std::size_t target) {
  require(target < logits.size(), "softmax_cross_entropy: target out of range");
  for (double v : logits) require(std::isfinite(v), "softmax_cross_entropy: non-finite logit");
  const double max = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - max);
  const double log_norm = std::log(total);
  ScalarAndGrad out;
  out.value = -(logits[target] - max - log_norm);
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(logits[i] - max - log_norm);
  out.grad[target] -= 1.0;
  return out;
}

ScalarAndGrad attention_entropy(std::span<const double> weights) {
  ScalarAndGrad out;
  out.grad.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    require(std::isfinite(w) && w >= 0.0, "attention_entropy: weights must be non-negative");
    if (w > 0.0) {
      out.value -= w * std::log(w);
      out.grad[i] = -(std::log(w) + 1.0);
    } else {
      out.grad[i] = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---- squeeze-and-excitation ------------------------------------------------------------

SeGateParams SeGateParams::init(std::size_t channels, std::size_t reduction, std::mt19937_64& rng) {
  require(channels >= 1 && reduction >= 1, "SeGateParams::init: invalid dimensions");
  SeGateParams p;
  p.channels = channels;
  p.reduced = std::max<std::size_t>(1, channels / reduction);
  p.w1 = init_matrix(p.reduced, p.channels, rng);
  p.w2 = init_matrix(p.channels, p.reduced, rng);
  return p;
}

SeGateParams SeGateParams::zeros_like(const SeGateParams& other) {
  SeGateParams p = other;
  std::fill(p.w1.begin(), p.w1.end(), 0.0);
  std::fill(p.w2.begin(), p.w2.end(), 0.0);
  return p;
}

void SeGateParams::validate() const {
  require(channels >= 1 && reduced >= 1, "SE gate: empty dimensions");
  require(w1.size() == reduced * channels && w2.size() == channels * reduced, "SE gate: matrix sizes do not chain");
}

void SeGateParams::append_views(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back({prefix + ".w1", w1});
  out.push_back({prefix + ".w2", w2});
}

Tensor se_gate(const Tensor& feature_map, const SeGateParams& params, SeCache* cache) {
  params.validate();
  require(feature_map.rank() == 3, "se_gate: expected a [C, H, W] tensor");
  require(feature_map.dim(0) == params.channels, "se_gate: channel count does not match parameters");
  const std::size_t c = params.channels;
  const std::size_t spatial = feature_map.dim(1) * feature_map.dim(2);
  require(spatial > 0, "se_gate: empty spatial extent");
  auto in = feature_map.data();

  std::vector<double> s(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::size_t i = 0; i < spatial; ++i) sum += in[ch * spatial + i];
    s[ch] = sum / static_cast<double>(spatial);
  }
  std::vector<double> hidden_pre(params.reduced, 0.0);
  for (std::size_t j = 0; j < params.reduced; ++j)
    for (std::size_t ch = 0; ch < c; ++ch) hidden_pre[j] += params.w1[j * c + ch] * s[ch];
  std::vector<double> gates(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double z = 0.0;
    for (std::size_t j = 0; j < params.reduced; ++j) z += params.w2[ch * params.reduced + j] * std::max(hidden_pre[j], 0.0);
    gates[ch] = sigmoid(z);
  }
  Tensor out(feature_map.shape());
  auto dst = out.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < spatial; ++i) dst[ch * spatial + i] = gates[ch] * in[ch * spatial + i];
  if (cache) {
    cache->squeezed = std::move(s);
    cache->hidden_pre = std::move(hidden_pre);
    cache->gates = std::move(gates);
    cache->input = feature_map;
  }
  return out;
}

SeBackward se_gate_backward(const SeGateParams& params, const SeCache& cache, const Tensor& upstream) {
  require(upstream.shape() == cache.input.shape(), "se_gate_backward: upstream shape mismatch");
  const std::size_t c = params.channels;
  const std::size_t r = params.reduced;
  const std::size_t spatial = upstream.size() / c;
  auto in = cache.input.data();
  auto up = upstream.data();

  SeBackward out{SeGateParams::zeros_like(params), Tensor(upstream.shape())};
  auto dx = out.input_grad.data();

  // Direct path through the multiplication, and the gate's sensitivity.
  std::vector<double> d_gate(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < spatial; ++i) {
      dx[ch * spatial + i] = cache.gates[ch] * up[ch * spatial + i];
      acc += up[ch * spatial + i] * in[ch * spatial + i];
    }
    d_gate[ch] = acc;
  }
  std::vector<double> d_hidden(r, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double g = cache.gates[ch];
    const double dz = d_gate[ch] * g * (1.0 - g);
    for (std::size_t j = 0; j < r; ++j) {
      out.param_grads.w2[ch * r + j] += dz * std::max(cache.hidden_pre[j], 0.0);
      d_hidden[j] += dz * params.w2[ch * r + j];
    }
  }
  std::vector<double> d_s(c, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    if (cache.hidden_pre[j] <= 0.0) continue;
    for (std::size_t ch = 0; ch < c; ++ch) {
      out.param_grads.w1[j * c + ch] += d_hidden[j] * cache.squeezed[ch];
      d_s[ch] += d_hidden[j] * params.w1[j * c + ch];
    }
  }
  // Squeeze path: every spatial position contributes 1/spatial to s_c.
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double share = d_s[ch] / static_cast<double>(spatial);
    for (std::size_t i = 0; i < spatial; ++i) dx[ch * spatial + i] += share;
  }
  return out;
}

// ---- optimization -------------------------------------------------------------------

void adam_step(AdamState& state, std::span<ParamView> params, std::span<const ParamView> grads) {
  require(params.size() == grads.size(), "adam_step: parameter and gradient lists differ in length");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.values.size(), 0.0);
      state.second_moment.emplace_back(p.values.size(), 0.0);
    }
  }
  require(state.first_moment.size() == params.size(), "adam_step: state does not match parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require(params[k].values.size() == grads[k].values.size() &&
                state.first_moment[k].size() == params[k].values.size(),
            "adam_step: shape mismatch for " + params[k].name);
    for (std::size_t i = 0; i < grads[k].values.size(); ++i)
      if (!std::isfinite(grads[k].values[i]))
        throw DomainError("adam_step: non-finite gradient in " + params[k].name + "[" + std::to_string(i) + "]");
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    auto theta = params[k].values;
    auto g = grads[k].values;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

GradCheckReport finite_difference_check(const std::function<double()>& loss, std::span<ParamView> params,
                                        std::span<const ParamView> analytic, double tolerance, double step) {
  require(params.size() == analytic.size(), "finite_difference_check: parameter and gradient lists differ");
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].values;
    require(theta.size() == analytic[k].values.size(), "finite_difference_check: shape mismatch for " + params[k].name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + step;
      const double up = loss();
      theta[i] = saved - step;
      const double down = loss();
      theta[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k].values[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (!std::isfinite(rel)) {
        report.max_relative_error = std::numeric_limits<double>::infinity();
        report.worst_parameter = params[k].name;
        report.worst_index = i;
      } else if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = params[k].name;
        report.worst_index = i;
      }
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace sonarfuse::nn

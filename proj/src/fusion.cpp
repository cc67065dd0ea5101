#include "sonarfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sonarfuse/checkpoint.hpp"
#include "sonarfuse/denoiser.hpp"
#include "sonarfuse/error.hpp"
#include "sonarfuse/image_io.hpp"
#include "sonarfuse/segmentation.hpp"

namespace sonarfuse::fusion {

std::string to_string(AlphaMode mode) {
  switch (mode) {
    case AlphaMode::Adaptive: return "adaptive";
    case AlphaMode::CombinedOnly: return "combined";
    case AlphaMode::ShadowOnly: return "shadow";
  }
  return "adaptive";
}

AlphaMode parse_alpha_mode(const std::string& text) {
  if (text == "adaptive") return AlphaMode::Adaptive;
  if (text == "combined") return AlphaMode::CombinedOnly;
  if (text == "shadow") return AlphaMode::ShadowOnly;
  throw DomainError("unknown fusion mode '" + text + "' (expected adaptive, combined or shadow)");
}

// ---- normalizer --------------------------------------------------------------

FeatureNormalizer FeatureNormalizer::fit(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty(), "FeatureNormalizer::fit: no rows");
  const std::size_t dim = rows.front().size();
  FeatureNormalizer n;
  n.mean.assign(dim, 0.0);
  n.scale.assign(dim, 1.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < dim; ++i) n.mean[i] += r[i];
  for (double& m : n.mean) m /= static_cast<double>(rows.size());
  std::vector<double> var(dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < dim; ++i) var[i] += (r[i] - n.mean[i]) * (r[i] - n.mean[i]);
  for (std::size_t i = 0; i < dim; ++i) {
    const double sd = std::sqrt(var[i] / static_cast<double>(rows.size()));
    n.scale[i] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return n;
}

FeatureNormalizer FeatureNormalizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

std::vector<double> FeatureNormalizer::apply(const std::vector<double>& row) const {
  require(row.size() == mean.size(), "FeatureNormalizer: dimension mismatch");
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - mean[i]) * scale[i];
  return out;
}

// ---- model -------------------------------------------------------------------

void FusionModel::validate() const {
  for (const auto* m : {&proj1, &proj2, &mlp1, &mlp2, &att1, &att2, &head}) m->validate();
  require(proj1.input_dim() == feature_dim() && proj1.output_dim() == feature_dim() &&
              proj2.input_dim() == feature_dim() && proj2.output_dim() == feature_dim(),
          "FusionModel: stream projections must preserve the feature dimension");
  require(mlp1.input_dim() == head.input_dim() && mlp2.input_dim() == head.input_dim(),
          "FusionModel: stream feature dimensions must match the head input");
  require(mlp1.output_dim() == att1.input_dim() && mlp2.output_dim() == att2.input_dim() &&
              att1.output_dim() == att2.output_dim() && mlp1.output_dim() == mlp2.output_dim(),
          "FusionModel: H1, H2 and attention dimensions must agree");
  require(norm1.mean.size() == feature_dim() && norm2.mean.size() == feature_dim(),
          "FusionModel: normalizer dimension mismatch");
  require(class_names.empty() || class_names.size() == classes(), "FusionModel: class names do not match head");
}

std::vector<nn::ParamView> FusionModel::views() {
  std::vector<nn::ParamView> v;
  proj1.append_views("proj1", v);
  proj2.append_views("proj2", v);
  mlp1.append_views("mlp1", v);
  mlp2.append_views("mlp2", v);
  att1.append_views("att1", v);
  att2.append_views("att2", v);
  head.append_views("head", v);
  return v;
}

FusionModel init_fusion_model(const ModelShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FusionModel m;
  const std::size_t stream[] = {shape.feature_dim, shape.hidden, shape.attention_dim};
  const std::size_t att[] = {shape.attention_dim, shape.attention_dim};
  const std::size_t head[] = {shape.feature_dim, shape.classes};
  m.mlp1 = nn::MlpParams::init(stream, rng);
  m.mlp2 = nn::MlpParams::init(stream, rng);
  m.att1 = nn::MlpParams::init(att, rng);
  m.att2 = nn::MlpParams::init(att, rng);
  m.head = nn::MlpParams::init(head, rng);
  for (auto* proj : {&m.proj1, &m.proj2}) {
    nn::DenseLayer layer;
    layer.inputs = layer.outputs = shape.feature_dim;
    layer.weight.assign(shape.feature_dim * shape.feature_dim, 0.0);
    for (std::size_t i = 0; i < shape.feature_dim; ++i) layer.weight[i * shape.feature_dim + i] = 1.0;
    layer.bias.assign(shape.feature_dim, 0.0);
    proj->layers = {layer};
  }
  m.norm1 = FeatureNormalizer::identity(shape.feature_dim);
  m.norm2 = FeatureNormalizer::identity(shape.feature_dim);
  return m;
}

FusionModel zeros_like(const FusionModel& model) {
  FusionModel g = model;
  for (auto* m : {&g.proj1, &g.proj2, &g.mlp1, &g.mlp2, &g.att1, &g.att2, &g.head}) *m = nn::MlpParams::zeros_like(*m);
  return g;
}

// ---- forward pieces -------------------------------------------------------------

namespace {

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// d entropy(alpha, 1 - alpha) / d alpha, 0 where the one-sided derivative is infinite.
double entropy_slope(double alpha, double beta) {
  const double w[] = {alpha, beta};
  const nn::ScalarAndGrad e = nn::attention_entropy(w);
  const double slope = e.grad[0] - e.grad[1];
  return std::isfinite(slope) ? slope : 0.0;
}

double entropy_value(double alpha, double beta) {
  const double w[] = {alpha, beta};
  return nn::attention_entropy(w).value;
}

AttentionWeights fixed_weights(AlphaMode mode) {
  return mode == AlphaMode::CombinedOnly ? AttentionWeights{1.0, 0.0} : AttentionWeights{0.0, 1.0};
}

}  // namespace

AttentionWeights normalize_attention(std::span<const double> alpha_bar, std::span<const double> beta_bar) {
  const double na = l2(alpha_bar);
  const double nb = l2(beta_bar);
  const double total = na + nb;
  if (total == 0.0) return {0.5, 0.5};
  const double alpha = na / total;
  return {alpha, 1.0 - alpha};
}

AttentionWeights attention_weights(const nn::Tensor& h1, const nn::Tensor& h2, const FusionModel& model) {
  const nn::Tensor a = nn::mlp_forward(model.att1, h1);
  const nn::Tensor b = nn::mlp_forward(model.att2, h2);
  return normalize_attention(a.data(), b.data());
}

FusedOutput fuse_and_classify(std::span<const double> f1, std::span<const double> f2, double alpha, double beta,
                              const FusionModel& model) {
  require(f1.size() == f2.size() && f1.size() == model.feature_dim(),
          "fuse_and_classify: feature dimensions do not match the model");
  FusedOutput out;
  out.z.resize(f1.size());
  for (std::size_t i = 0; i < f1.size(); ++i) out.z[i] = alpha * f1[i] + beta * f2[i];
  const nn::Tensor logits = nn::mlp_forward(model.head, nn::Tensor::vector(out.z));
  out.probabilities = nn::softmax(logits.data());
  out.predicted = static_cast<std::size_t>(
      std::max_element(out.probabilities.begin(), out.probabilities.end()) - out.probabilities.begin());
  return out;
}

TotalLoss total_loss(std::span<const double> probabilities, std::size_t target, double alpha, double beta,
                     double lambda) {
  require(target < probabilities.size(), "total_loss: target out of range");
  TotalLoss out;
  out.cross_entropy = -std::log(std::max(probabilities[target], std::numeric_limits<double>::min()));
  out.attention_entropy = entropy_value(alpha, beta);
  out.value = out.cross_entropy + lambda * out.attention_entropy;
  out.d_logits.assign(probabilities.begin(), probabilities.end());
  out.d_logits[target] -= 1.0;
  out.d_alpha = lambda == 0.0 ? 0.0 : lambda * entropy_slope(alpha, beta);
  return out;
}

ProjectedStreams project_streams(const FusionModel& model, const StreamFeatures& features) {
  const nn::Tensor f1 = nn::mlp_forward(model.proj1, nn::Tensor::vector(model.norm1.apply(features.combined)));
  const nn::Tensor f2 = nn::mlp_forward(model.proj2, nn::Tensor::vector(model.norm2.apply(features.shadow)));
  return {std::vector<double>(f1.data().begin(), f1.data().end()),
          std::vector<double>(f2.data().begin(), f2.data().end())};
}

Prediction predict(const FusionModel& model, const StreamFeatures& features) {
  const ProjectedStreams streams = project_streams(model, features);
  const std::vector<double>& f1 = streams.f1;
  const std::vector<double>& f2 = streams.f2;
  Prediction p;
  if (model.mode == AlphaMode::Adaptive) {
    const nn::Tensor h1 = nn::mlp_forward(model.mlp1, nn::Tensor::vector(f1));
    const nn::Tensor h2 = nn::mlp_forward(model.mlp2, nn::Tensor::vector(f2));
    p.weights = attention_weights(h1, h2, model);
  } else {
    p.weights = fixed_weights(model.mode);
  }
  p.fused = fuse_and_classify(f1, f2, p.weights.alpha, p.weights.beta, model);
  return p;
}

// ---- batched loss and gradient ----------------------------------------------------

BatchLoss loss_and_grad(const FusionModel& model, std::span<const LabeledFeatures> batch) {
  require(!batch.empty(), "loss_and_grad: empty batch");
  const std::size_t n = batch.size();
  const std::size_t d = model.feature_dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> raw1(n * d), raw2(n * d);
  for (std::size_t b = 0; b < n; ++b) {
    const auto f1 = model.norm1.apply(batch[b].features.combined);
    const auto f2 = model.norm2.apply(batch[b].features.shadow);
    std::copy(f1.begin(), f1.end(), raw1.begin() + static_cast<long>(b * d));
    std::copy(f2.begin(), f2.end(), raw2.begin() + static_cast<long>(b * d));
  }
  nn::MlpCache c_proj1, c_proj2, c_mlp1, c_mlp2, c_att1, c_att2, c_head;
  const nn::Tensor p1 = nn::mlp_forward(model.proj1, nn::Tensor({n, d}, std::move(raw1)), &c_proj1);
  const nn::Tensor p2 = nn::mlp_forward(model.proj2, nn::Tensor({n, d}, std::move(raw2)), &c_proj2);
  const auto x1 = p1.data();
  const auto x2 = p2.data();

  const bool adaptive = model.mode == AlphaMode::Adaptive;
  nn::Tensor abar, bbar;
  std::vector<double> na(n, 0.0), nb(n, 0.0), alpha(n), beta(n);
  if (adaptive) {
    const nn::Tensor h1 = nn::mlp_forward(model.mlp1, p1, &c_mlp1);
    const nn::Tensor h2 = nn::mlp_forward(model.mlp2, p2, &c_mlp2);
    abar = nn::mlp_forward(model.att1, h1, &c_att1);
    bbar = nn::mlp_forward(model.att2, h2, &c_att2);
    const std::size_t k = abar.dim(1);
    for (std::size_t b = 0; b < n; ++b) {
      const auto a_row = abar.data().subspan(b * k, k);
      const auto b_row = bbar.data().subspan(b * k, k);
      na[b] = l2(a_row);
      nb[b] = l2(b_row);
      const AttentionWeights w = normalize_attention(a_row, b_row);
      alpha[b] = w.alpha;
      beta[b] = w.beta;
    }
  } else {
    const AttentionWeights w = fixed_weights(model.mode);
    std::fill(alpha.begin(), alpha.end(), w.alpha);
    std::fill(beta.begin(), beta.end(), w.beta);
  }

  std::vector<double> z(n * d);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t i = 0; i < d; ++i) z[b * d + i] = alpha[b] * x1[b * d + i] + beta[b] * x2[b * d + i];
  const nn::Tensor logits = nn::mlp_forward(model.head, nn::Tensor({n, d}, z), &c_head);
  const std::size_t classes = model.classes();

  BatchLoss out;
  out.grad = zeros_like(model);
  nn::Tensor d_logits({n, classes});
  std::vector<double> d_alpha_entropy(n, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    const auto row = logits.data().subspan(b * classes, classes);
    const nn::ScalarAndGrad ce = nn::softmax_cross_entropy(row, batch[b].label);
    const double ent = entropy_value(alpha[b], beta[b]);
    out.cross_entropy += ce.value * inv_n;
    out.attention_entropy += ent * inv_n;
    out.value += (ce.value + model.lambda * ent) * inv_n;
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    if (static_cast<std::size_t>(best) == batch[b].label) ++out.correct;
    for (std::size_t c = 0; c < classes; ++c) d_logits[b * classes + c] = ce.grad[c] * inv_n;
    if (adaptive && model.lambda != 0.0) d_alpha_entropy[b] = model.lambda * entropy_slope(alpha[b], beta[b]) * inv_n;
  }

  nn::MlpBackward head_back = nn::mlp_backward(model.head, c_head, d_logits);
  out.grad.head = std::move(head_back.param_grads);
  const auto dz = head_back.input_grad.data();
  // Z = alpha F1 + beta F2 feeds both projections directly.
  nn::Tensor d_p1({n, d}), d_p2({n, d});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t i = 0; i < d; ++i) {
      d_p1[b * d + i] = alpha[b] * dz[b * d + i];
      d_p2[b * d + i] = beta[b] * dz[b * d + i];
    }
  auto finish = [&] {
    out.grad.proj1 = nn::mlp_backward(model.proj1, c_proj1, d_p1).param_grads;
    out.grad.proj2 = nn::mlp_backward(model.proj2, c_proj2, d_p2).param_grads;
    return std::move(out);
  };
  if (!adaptive) return finish();

  const std::size_t k = abar.dim(1);
  nn::Tensor d_abar({n, k}), d_bbar({n, k});
  for (std::size_t b = 0; b < n; ++b) {
    const double total = na[b] + nb[b];
    if (total == 0.0) continue;
    // beta = 1 - alpha, so dZ/dalpha = F1 - F2.
    double d_alpha = d_alpha_entropy[b];
    for (std::size_t i = 0; i < d; ++i) d_alpha += dz[b * d + i] * (x1[b * d + i] - x2[b * d + i]);
    const double d_na = d_alpha * nb[b] / (total * total);
    const double d_nb = -d_alpha * na[b] / (total * total);
    for (std::size_t j = 0; j < k; ++j) {
      if (na[b] > 0.0) d_abar[b * k + j] = d_na * abar[b * k + j] / na[b];
      if (nb[b] > 0.0) d_bbar[b * k + j] = d_nb * bbar[b * k + j] / nb[b];
    }
  }
  nn::MlpBackward att1_back = nn::mlp_backward(model.att1, c_att1, d_abar);
  nn::MlpBackward att2_back = nn::mlp_backward(model.att2, c_att2, d_bbar);
  out.grad.att1 = std::move(att1_back.param_grads);
  out.grad.att2 = std::move(att2_back.param_grads);
  nn::MlpBackward mlp1_back = nn::mlp_backward(model.mlp1, c_mlp1, att1_back.input_grad);
  nn::MlpBackward mlp2_back = nn::mlp_backward(model.mlp2, c_mlp2, att2_back.input_grad);
  out.grad.mlp1 = std::move(mlp1_back.param_grads);
  out.grad.mlp2 = std::move(mlp2_back.param_grads);
  for (std::size_t i = 0; i < n * d; ++i) {
    d_p1[i] += mlp1_back.input_grad[i];
    d_p2[i] += mlp2_back.input_grad[i];
  }
  return finish();
}

double batch_loss(const FusionModel& model, std::span<const LabeledFeatures> batch) {
  return loss_and_grad(model, batch).value;
}

// ---- training -------------------------------------------------------------------

void TrainConfig::validate() const {
  require(epochs >= 1, "train config: epochs must be positive");
  require(batch_size >= 1, "train config: batch size must be positive");
  require(learning_rate > 0.0, "train config: learning rate must be positive");
  require(validation_fraction > 0.0 && validation_fraction < 1.0, "train config: split must lie in (0,1)");
  require(hidden >= 1 && attention_dim >= 1, "train config: layer sizes must be positive");
  require(std::isfinite(lambda), "train config: lambda must be finite");
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batchSize", cfg.batch_size},
          {"learningRate", cfg.learning_rate},
          {"lambda", cfg.lambda},
          {"seed", cfg.seed},
          {"validationFraction", cfg.validation_fraction},
          {"mode", to_string(cfg.mode)},
          {"hidden", cfg.hidden},
          {"attentionDim", cfg.attention_dim}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
  try {
    base.epochs = j.value("epochs", base.epochs);
    base.batch_size = j.value("batchSize", base.batch_size);
    base.learning_rate = j.value("learningRate", base.learning_rate);
    base.lambda = j.value("lambda", base.lambda);
    base.seed = j.value("seed", base.seed);
    base.validation_fraction = j.value("validationFraction", base.validation_fraction);
    if (j.contains("mode")) base.mode = parse_alpha_mode(j["mode"].get<std::string>());
    base.hidden = j.value("hidden", base.hidden);
    base.attention_dim = j.value("attentionDim", base.attention_dim);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("train config: ") + e.what());
  }
  return base;
}

nlohmann::json to_json(const std::vector<EpochStats>& history) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : history)
    arr.push_back({{"epoch", e.epoch},
                   {"loss", e.loss},
                   {"trainAccuracy", e.train_accuracy},
                   {"validationAccuracy", e.validation_accuracy},
                   {"meanAlpha", e.mean_alpha}});
  return arr;
}

namespace {

double accuracy_of(const FusionModel& model, const std::vector<LabeledFeatures>& data, double* mean_alpha) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  double alpha_sum = 0.0;
  for (const auto& s : data) {
    const Prediction p = predict(model, s.features);
    if (p.fused.predicted == s.label) ++correct;
    alpha_sum += p.weights.alpha;
  }
  if (mean_alpha) *mean_alpha = alpha_sum / static_cast<double>(data.size());
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

TrainResult train_fusion(const std::vector<LabeledFeatures>& data, const std::vector<std::string>& class_names,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw DomainError("train_fusion: no training samples");
  require(!class_names.empty(), "train_fusion: no class names");
  std::vector<bool> present(class_names.size(), false);
  for (const auto& s : data) {
    require(s.label < class_names.size(), "train_fusion: label outside the class list");
    present[s.label] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2)
    throw DomainError("train_fusion: at least two classes are required");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::lround(cfg.validation_fraction * static_cast<double>(data.size())));
  n_val = std::min(n_val, data.size() - 1);
  std::vector<LabeledFeatures> train, validation;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_val ? validation : train).push_back(data[order[i]]);

  ModelShape shape{kFeatureDim, cfg.hidden, cfg.attention_dim, class_names.size()};
  shape.feature_dim = train.front().features.combined.size();
  FusionModel model = init_fusion_model(shape, rng());
  model.lambda = cfg.lambda;
  model.mode = cfg.mode;
  model.class_names = class_names;
  {
    std::vector<std::vector<double>> rows1, rows2;
    for (const auto& s : train) {
      rows1.push_back(s.features.combined);
      rows2.push_back(s.features.shadow);
    }
    model.norm1 = FeatureNormalizer::fit(rows1);
    model.norm2 = FeatureNormalizer::fit(rows2);
  }
  model.validate();

  nn::AdamState adam;
  adam.learning_rate = cfg.learning_rate;
  TrainResult result;
  result.model = model;
  double best_validation = -1.0;

  std::vector<LabeledFeatures> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(train.size(), start + cfg.batch_size);
      const std::span<const LabeledFeatures> slice(train.data() + start, end - start);
      BatchLoss bl = loss_and_grad(model, slice);
      loss_sum += bl.value * static_cast<double>(slice.size());
      auto params = model.views();
      auto grads = bl.grad.views();
      nn::adam_step(adam, params, grads);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(train.size());
    stats.train_accuracy = accuracy_of(model, train, &stats.mean_alpha);
    stats.validation_accuracy = validation.empty() ? stats.train_accuracy : accuracy_of(model, validation, nullptr);
    result.history.push_back(stats);
    if (stats.validation_accuracy > best_validation) {
      best_validation = stats.validation_accuracy;
      result.model = model;
      result.selected_epoch = epoch;
    }
  }
  return result;
}

// ---- evaluation --------------------------------------------------------------------

EvalReport evaluate(const FusionModel& model, const std::vector<LabeledFeatures>& data) {
  EvalReport report;
  report.class_names = model.class_names;
  const std::size_t k = model.classes();
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (const auto& s : data) {
    if (s.label >= k) throw DomainError("evaluate: sample label outside the model's class set");
    const Prediction p = predict(model, s.features);
    report.images.push_back({s.id, p.weights.alpha, p.weights.beta, p.fused.predicted, s.label});
    ++report.confusion[s.label][p.fused.predicted];
    if (p.fused.predicted == s.label) ++correct;
  }
  report.accuracy = data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json images_json = nlohmann::json::array();
  for (const auto& r : images)
    images_json.push_back({{"id", r.id},
                           {"alpha", r.alpha},
                           {"beta", r.beta},
                           {"predicted", class_names.empty() ? std::to_string(r.predicted) : class_names[r.predicted]},
                           {"true", class_names.empty() ? std::to_string(r.truth) : class_names[r.truth]}});
  return {{"accuracy", accuracy},
          {"count", images.size()},
          {"classNames", class_names},
          {"confusion", confusion},
          {"images", images_json}};
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "id,alpha,beta,predicted,true\n";
  for (const auto& r : images) {
    out << r.id << ',' << r.alpha << ',' << r.beta << ','
        << (class_names.empty() ? std::to_string(r.predicted) : class_names[r.predicted]) << ','
        << (class_names.empty() ? std::to_string(r.truth) : class_names[r.truth]) << '\n';
  }
  return out.str();
}

// ---- manifest plumbing -------------------------------------------------------------

std::string to_string(MaskSource source) {
  switch (source) {
    case MaskSource::GroundTruth: return "ground-truth";
    case MaskSource::Predicted: return "predicted";
    case MaskSource::Segment: return "segment";
  }
  return "ground-truth";
}

MaskSource parse_mask_source(const std::string& text) {
  if (text == "ground-truth" || text == "gt") return MaskSource::GroundTruth;
  if (text == "predicted") return MaskSource::Predicted;
  if (text == "segment") return MaskSource::Segment;
  throw DomainError("unknown mask source '" + text + "' (expected ground-truth, predicted or segment)");
}

FeaturizeResult featurize_manifest(const scene::DatasetManifest& manifest, MaskSource source,
                                   const std::vector<std::string>& class_names,
                                   const denoise::DenoiseModel* denoiser, std::uint64_t seed) {
  FeaturizeResult result;
  if (class_names.empty()) {
    for (scene::ObjectClass c : scene::kAllClasses)
      for (const auto& e : manifest.entries)
        if (e.label == c) {
          result.class_names.push_back(scene::to_string(c));
          break;
        }
  } else {
    result.class_names = class_names;
  }
  for (const auto& e : manifest.entries) {
    const std::string label = scene::to_string(e.label);
    const auto it = std::find(result.class_names.begin(), result.class_names.end(), label);
    if (it == result.class_names.end())
      throw DomainError("manifest label '" + label + "' is not among the model classes");
    try {
      Raster img = io::read_image(manifest.input_image(e));
      if (denoiser) img = denoise::denoise_image(*denoiser, img);
      ShadowMask mask;
      switch (source) {
        case MaskSource::GroundTruth:
          mask = io::read_mask(manifest.resolve(e.shadow_mask));
          break;
        case MaskSource::Predicted:
          if (e.predicted_shadow_mask.empty()) throw IoError("entry has no predicted shadow mask");
          mask = io::read_mask(manifest.resolve(e.predicted_shadow_mask));
          break;
        case MaskSource::Segment: {
          segmentation::SegmentationConfig cfg;
          cfg.seed = seed;
          mask = segmentation::segment_shadows(img, cfg);
          break;
        }
      }
      result.data.push_back({e.id, extract_features(img, mask), static_cast<std::size_t>(it - result.class_names.begin())});
    } catch (const IoError& ex) {
      result.warnings.push_back(e.id + ": " + ex.what());
    }
  }
  return result;
}

void save_model(const FusionModel& model, const std::filesystem::path& path, const nlohmann::json& extra) {
  std::vector<nn::NamedTensor> tensors;
  nn::append_tensors("proj1", model.proj1, tensors);
  nn::append_tensors("proj2", model.proj2, tensors);
  nn::append_tensors("mlp1", model.mlp1, tensors);
  nn::append_tensors("mlp2", model.mlp2, tensors);
  nn::append_tensors("att1", model.att1, tensors);
  nn::append_tensors("att2", model.att2, tensors);
  nn::append_tensors("head", model.head, tensors);
  tensors.push_back({"norm1.mean", nn::Tensor::vector(model.norm1.mean)});
  tensors.push_back({"norm1.scale", nn::Tensor::vector(model.norm1.scale)});
  tensors.push_back({"norm2.mean", nn::Tensor::vector(model.norm2.mean)});
  tensors.push_back({"norm2.scale", nn::Tensor::vector(model.norm2.scale)});
  nlohmann::json hyper = extra;
  hyper["kind"] = "fusion-classifier";
  hyper["lambda"] = model.lambda;
  hyper["mode"] = to_string(model.mode);
  hyper["classNames"] = model.class_names;
  nn::save_checkpoint(path, tensors, hyper);
}

FusionModel load_model(const std::filesystem::path& path) {
  const nn::LoadedCheckpoint ckpt = nn::load_checkpoint(path);
  FusionModel m;
  m.proj1 = nn::read_mlp("proj1", ckpt);
  m.proj2 = nn::read_mlp("proj2", ckpt);
  m.mlp1 = nn::read_mlp("mlp1", ckpt);
  m.mlp2 = nn::read_mlp("mlp2", ckpt);
  m.att1 = nn::read_mlp("att1", ckpt);
  m.att2 = nn::read_mlp("att2", ckpt);
  m.head = nn::read_mlp("head", ckpt);
  auto vec = [&](const std::string& name) {
    const auto& t = ckpt.get(name);
    return std::vector<double>(t.data().begin(), t.data().end());
  };
  m.norm1 = {vec("norm1.mean"), vec("norm1.scale")};
  m.norm2 = {vec("norm2.mean"), vec("norm2.scale")};
  const auto& h = ckpt.hyperparameters;
  if (h.is_object()) {
    m.lambda = h.value("lambda", m.lambda);
    if (h.contains("mode")) m.mode = parse_alpha_mode(h["mode"].get<std::string>());
    if (h.contains("classNames")) m.class_names = h["classNames"].get<std::vector<std::string>>();
  }
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw IoError(std::string("fusion checkpoint: ") + e.what());
  }
  return m;
}

}  // namespace sonarfuse::fusion

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/features.hpp"
#include "sonarfuse/nn.hpp"
#include "sonarfuse/scene.hpp"

namespace sonarfuse::denoise {
struct DenoiseModel;
}

namespace sonarfuse::fusion {

/// How the fusion weights are obtained. The two fixed modes are the single-stream ablations.
enum class AlphaMode {
  Adaptive,
  CombinedOnly,  // alpha = 1
  ShadowOnly,    // alpha = 0
};

std::string to_string(AlphaMode mode);
AlphaMode parse_alpha_mode(const std::string& text);

/// Per-dimension standardization fitted on training features.
struct FeatureNormalizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 / std, 1 where the std vanishes

  static FeatureNormalizer fit(const std::vector<std::vector<double>>& rows);
  static FeatureNormalizer identity(std::size_t dim);
  std::vector<double> apply(const std::vector<double>& row) const;
};

struct FusionModel {
  nn::MlpParams proj1;  // trainable last backbone layer: raw combined features -> F1
  nn::MlpParams proj2;  // raw shadow features -> F2
  nn::MlpParams mlp1;  // F1 -> H1
  nn::MlpParams mlp2;  // F2 -> H2
  nn::MlpParams att1;  // H1 -> alpha-bar (single linear layer)
  nn::MlpParams att2;  // H2 -> beta-bar
  nn::MlpParams head;  // Z -> logits
  double lambda = -0.01;
  AlphaMode mode = AlphaMode::Adaptive;
  FeatureNormalizer norm1;
  FeatureNormalizer norm2;
  std::vector<std::string> class_names;

  std::size_t feature_dim() const { return head.input_dim(); }
  std::size_t classes() const { return head.output_dim(); }
  void validate() const;
  std::vector<nn::ParamView> views();
};

struct ModelShape {
  std::size_t feature_dim = kFeatureDim;
  std::size_t hidden = 32;
  std::size_t attention_dim = 16;
  std::size_t classes = 5;
};

/// Stream projections start at the identity so F1/F2 initially equal the standardized features.
FusionModel init_fusion_model(const ModelShape& shape, std::uint64_t seed);
FusionModel zeros_like(const FusionModel& model);

struct AttentionWeights {
  double alpha = 0.5;
  double beta = 0.5;
};

/// alpha = |a| / (|a| + |b|), beta = |b| / (|a| + |b|); both 0.5 when both norms vanish.
AttentionWeights normalize_attention(std::span<const double> alpha_bar, std::span<const double> beta_bar);

/// Applies att1/att2 to H1/H2 and normalizes the resulting norms.
AttentionWeights attention_weights(const nn::Tensor& h1, const nn::Tensor& h2, const FusionModel& model);

struct FusedOutput {
  std::vector<double> z;
  std::vector<double> probabilities;
  std::size_t predicted = 0;
};

/// Z = alpha F1 + beta F2; R = softmax(W Z + b).
FusedOutput fuse_and_classify(std::span<const double> f1, std::span<const double> f2, double alpha, double beta,
                              const FusionModel& model);

struct TotalLoss {
  double value = 0.0;
  double cross_entropy = 0.0;
  double attention_entropy = 0.0;
  std::vector<double> d_logits;
  /// d/d alpha of the regularizer with beta = 1 - alpha.
  double d_alpha = 0.0;
};

/// CE(R, target) + lambda * (-alpha ln alpha - beta ln beta). Gradients are w.r.t. the logits
/// that produced R and the attention split.
TotalLoss total_loss(std::span<const double> probabilities, std::size_t target, double alpha, double beta,
                     double lambda);

struct ProjectedStreams {
  std::vector<double> f1;
  std::vector<double> f2;
};

/// Standardizes the raw stream features and applies the stream projections.
ProjectedStreams project_streams(const FusionModel& model, const StreamFeatures& features);

/// Full per-sample forward pass from raw (unnormalized) stream features.
struct Prediction {
  AttentionWeights weights;
  FusedOutput fused;
};

Prediction predict(const FusionModel& model, const StreamFeatures& features);

struct LabeledFeatures {
  std::string id;
  StreamFeatures features;
  std::size_t label = 0;
};

struct BatchLoss {
  double value = 0.0;
  double cross_entropy = 0.0;
  double attention_entropy = 0.0;
  std::size_t correct = 0;
  FusionModel grad;
};

/// Mean total loss over the batch with exact gradients for every parameter,
/// including the path through the attention norm normalization.
BatchLoss loss_and_grad(const FusionModel& model, std::span<const LabeledFeatures> batch);
double batch_loss(const FusionModel& model, std::span<const LabeledFeatures> batch);

struct TrainConfig {
  int epochs = 60;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double lambda = -0.01;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  AlphaMode mode = AlphaMode::Adaptive;
  std::size_t hidden = 32;
  std::size_t attention_dim = 16;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Fields absent from `j` keep the values of `base`.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  double mean_alpha = 0.0;
};

struct TrainResult {
  FusionModel model;
  std::vector<EpochStats> history;
  int selected_epoch = 0;
};

/// Mini-batch Adam on a seeded train/validation split; returns the parameters of the epoch with
/// the best validation accuracy (earliest on ties).
TrainResult train_fusion(const std::vector<LabeledFeatures>& data, const std::vector<std::string>& class_names,
                         const TrainConfig& cfg);

nlohmann::json to_json(const std::vector<EpochStats>& history);

struct ImageResult {
  std::string id;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t predicted = 0;
  std::size_t truth = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<ImageResult> images;
  std::vector<std::string> class_names;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

EvalReport evaluate(const FusionModel& model, const std::vector<LabeledFeatures>& data);

// ---- manifest plumbing -----------------------------------------------------

enum class MaskSource {
  GroundTruth,
  Predicted,  // the manifest's predictedShadowMask entries
  Segment,    // run shadow segmentation on the input image
};

std::string to_string(MaskSource source);
MaskSource parse_mask_source(const std::string& text);

struct FeaturizeResult {
  std::vector<LabeledFeatures> data;
  std::vector<std::string> class_names;
  std::vector<std::string> warnings;
};

/// Reads every entry's input image and mask and extracts features. Unreadable entries are
/// skipped with a warning. When `class_names` is non-empty, labels index into it and an
/// unknown label is an error.
FeaturizeResult featurize_manifest(const scene::DatasetManifest& manifest, MaskSource source,
                                   const std::vector<std::string>& class_names = {},
                                   const denoise::DenoiseModel* denoiser = nullptr, std::uint64_t seed = 0);

void save_model(const FusionModel& model, const std::filesystem::path& path, const nlohmann::json& extra);
FusionModel load_model(const std::filesystem::path& path);

}  // namespace sonarfuse::fusion

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/nn.hpp"
#include "sonarfuse/raster.hpp"

namespace sonarfuse::denoise {

struct LossWeights {
  double lambda1 = 1.0;  // plain squared error
  double lambda2 = 1.0;  // mask-weighted squared error
  double lambda3 = 0.0;  // gradient-map (structural) difference

  void validate() const;
};

/// Which pixels the second loss term emphasizes: (1 - M) as in the composite loss, or M.
enum class MaskPolarity {
  Complement,  // weight (1 - M)
  Direct,      // weight M
};

std::string to_string(MaskPolarity polarity);
MaskPolarity parse_mask_polarity(const std::string& text);

/// Loss over an h x w x c block stored row-major with interleaved channels. `mask` holds h*w
/// weights broadcast over channels. Returns the value and writes dL/d(denoised) into `grad`
/// (resized to diff.size()).
double region_loss_flat(std::span<const double> diff, std::span<const double> mask, std::size_t h, std::size_t w,
                        std::size_t c, const LossWeights& weights, MaskPolarity polarity, std::vector<double>* grad);

struct RegionLoss {
  double value = 0.0;
  Raster gradient;  // d loss / d denoised
};

/// lambda1 mean(d^2) + lambda2 mean((d (1 - M))^2) + lambda3 structural, d = denoised - reference.
RegionLoss region_masked_loss(const Raster& denoised, const Raster& reference, const RegionMask& mask,
                              const LossWeights& weights = {}, MaskPolarity polarity = MaskPolarity::Complement);

struct DenoiseConfig {
  std::size_t patch_size = 9;
  std::size_t stride = 4;
  std::size_t hidden = 64;
  std::size_t latent_channels = 16;
  std::size_t latent_side = 2;  // latent map is channels x side x side
  std::size_t se_reduction = 4;
  int epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  std::size_t patches_per_image = 64;
  std::uint64_t seed = 0;
  LossWeights weights;
  MaskPolarity polarity = MaskPolarity::Complement;

  void validate() const;
};

nlohmann::json to_json(const DenoiseConfig& cfg);
DenoiseConfig denoise_config_from_json(const nlohmann::json& j, DenoiseConfig base = {});

/// Patch encoder MLP -> SE gate over the latent channels -> patch decoder MLP, with the
/// decoder output added to the input patch scaled by learnable per-pixel skip gains.
struct DenoiseModel {
  nn::MlpParams encoder;
  nn::SeGateParams se;
  nn::MlpParams decoder;
  std::size_t patch_size = 9;
  std::size_t stride = 4;
  std::size_t latent_channels = 16;
  std::size_t latent_side = 2;
  /// Learnable per-pixel gain on the input patch added to the decoder output. It starts at 1,
  /// so an untrained model is close to the identity.
  std::vector<double> skip;

  std::size_t patch_pixels() const { return patch_size * patch_size; }
  void validate() const;
  std::vector<nn::ParamView> views();
};

DenoiseModel init_denoise_model(const DenoiseConfig& cfg, std::uint64_t seed);
DenoiseModel zeros_like(const DenoiseModel& model);

/// Single-channel square patches, `count` of them, each patch_size^2 values.
struct PatchBatch {
  std::size_t count = 0;
  std::size_t patch_size = 0;
  std::vector<double> noisy;
  std::vector<double> clean;
  std::vector<double> mask;
};

std::vector<double> denoise_patches(const DenoiseModel& model, std::span<const double> patches, std::size_t count);

struct PatchLoss {
  double value = 0.0;  // mean over patches of the per-patch region loss
  DenoiseModel grad;
};

PatchLoss patch_loss_and_grad(const DenoiseModel& model, const PatchBatch& batch, const LossWeights& weights,
                              MaskPolarity polarity);

struct DenoisePair {
  Raster noisy;
  Raster clean;
  RegionMask mask;
};

/// `per_image` patches per pair at seeded random positions, each from a random channel.
PatchBatch sample_patches(const std::vector<DenoisePair>& pairs, std::size_t patch_size, std::size_t per_image,
                          std::uint64_t seed);

struct DenoiseTrainResult {
  DenoiseModel model;
  std::vector<double> loss_history;  // mean training loss per epoch
};

DenoiseTrainResult train_patch_denoiser(const std::vector<DenoisePair>& pairs, const DenoiseConfig& cfg);
DenoiseTrainResult train_on_patches(const PatchBatch& patches, const DenoiseConfig& cfg);

/// Overlapping patches (each channel independently) averaged uniformly, clipped to [0,1].
Raster denoise_image(const DenoiseModel& model, const Raster& noisy);

/// M * box(weak) + (1 - M) * box(strong).
Raster baseline_region_filter(const Raster& noisy, const RegionMask& mask, int strong_kernel, int weak_kernel);

/// Plain box filter of the given size on every channel.
Raster uniform_filter(const Raster& img, int kernel);

void save_model(const DenoiseModel& model, const std::filesystem::path& path, const nlohmann::json& extra);
DenoiseModel load_model(const std::filesystem::path& path);

}  // namespace sonarfuse::denoise

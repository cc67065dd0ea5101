#include "sonarfuse/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sonarfuse/checkpoint.hpp"
#include "sonarfuse/error.hpp"
#include "sonarfuse/imaging.hpp"

namespace sonarfuse::denoise {

void LossWeights::validate() const {
  require(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0 && std::isfinite(lambda1) && std::isfinite(lambda2) &&
              std::isfinite(lambda3),
          "loss weights must be finite and non-negative");
}

std::string to_string(MaskPolarity polarity) {
  return polarity == MaskPolarity::Complement ? "complement" : "direct";
}

MaskPolarity parse_mask_polarity(const std::string& text) {
  if (text == "complement") return MaskPolarity::Complement;
  if (text == "direct") return MaskPolarity::Direct;
  throw DomainError("unknown mask polarity '" + text + "' (expected complement or direct)");
}

// ---- loss ---------------------------------------------------------------------

namespace {

constexpr int kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
constexpr int kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

// Mean of squared Sobel responses of `diff` over interior pixels; accumulates its gradient
// scaled by `scale` into `grad` when non-null.
double structural_term(std::span<const double> diff, std::size_t h, std::size_t w, std::size_t c, double scale,
                       std::vector<double>* grad) {
  if (h < 3 || w < 3) return 0.0;
  const double n = static_cast<double>((h - 2) * (w - 2) * c);
  double total = 0.0;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 1; y + 1 < h; ++y)
      for (std::size_t x = 1; x + 1 < w; ++x) {
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const double v = diff[((y + i - 1) * w + (x + j - 1)) * c + ch];
            gx += kSobelX[i][j] * v;
            gy += kSobelY[i][j] * v;
          }
        total += gx * gx + gy * gy;
        if (grad) {
          const double f = scale * 2.0 / n;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              (*grad)[((y + i - 1) * w + (x + j - 1)) * c + ch] += f * (gx * kSobelX[i][j] + gy * kSobelY[i][j]);
        }
      }
  return total / n;
}

}  // namespace

double region_loss_flat(std::span<const double> diff, std::span<const double> mask, std::size_t h, std::size_t w,
                        std::size_t c, const LossWeights& weights, MaskPolarity polarity, std::vector<double>* grad) {
  require(diff.size() == h * w * c && mask.size() == h * w, "region loss: buffer sizes do not match");
  require(!diff.empty(), "region loss: empty input");
  const double n = static_cast<double>(diff.size());
  if (grad) grad->assign(diff.size(), 0.0);
  double plain = 0.0, weighted = 0.0;
  for (std::size_t p = 0; p < h * w; ++p) {
    const double wt = polarity == MaskPolarity::Complement ? 1.0 - mask[p] : mask[p];
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double d = diff[p * c + ch];
      plain += d * d;
      weighted += d * d * wt * wt;
      if (grad) (*grad)[p * c + ch] = 2.0 * d * (weights.lambda1 + weights.lambda2 * wt * wt) / n;
    }
  }
  double value = weights.lambda1 * plain / n + weights.lambda2 * weighted / n;
  if (weights.lambda3 != 0.0) value += weights.lambda3 * structural_term(diff, h, w, c, weights.lambda3, grad);
  return value;
}

RegionLoss region_masked_loss(const Raster& denoised, const Raster& reference, const RegionMask& mask,
                              const LossWeights& weights, MaskPolarity polarity) {
  weights.validate();
  require(denoised.same_shape(reference), "region_masked_loss: image shapes differ");
  require(mask.height() == denoised.height() && mask.width() == denoised.width(),
          "region_masked_loss: mask shape differs from the images");
  std::vector<double> diff(denoised.data().size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = denoised.data()[i] - reference.data()[i];
  std::vector<double> grad;
  RegionLoss out;
  out.value = region_loss_flat(diff, mask.data(), denoised.height(), denoised.width(), denoised.channels(), weights,
                               polarity, &grad);
  out.gradient = Raster(denoised.height(), denoised.width(), denoised.channels(), std::move(grad));
  return out;
}

// ---- config ---------------------------------------------------------------------

void DenoiseConfig::validate() const {
  require(patch_size >= 3 && patch_size % 2 == 1, "denoise config: patch size must be odd and >= 3");
  require(stride >= 1 && stride <= patch_size, "denoise config: stride must lie in [1, patch size]");
  require(hidden >= 1 && latent_channels >= 1 && latent_side >= 1, "denoise config: layer sizes must be positive");
  require(se_reduction >= 1 && se_reduction <= latent_channels, "denoise config: SE reduction out of range");
  require(epochs >= 1 && batch_size >= 1 && patches_per_image >= 1, "denoise config: counts must be positive");
  require(learning_rate > 0.0, "denoise config: learning rate must be positive");
  weights.validate();
}

nlohmann::json to_json(const DenoiseConfig& cfg) {
  return {{"patchSize", cfg.patch_size},
          {"stride", cfg.stride},
          {"hidden", cfg.hidden},
          {"latentChannels", cfg.latent_channels},
          {"latentSide", cfg.latent_side},
          {"seReduction", cfg.se_reduction},
          {"epochs", cfg.epochs},
          {"batchSize", cfg.batch_size},
          {"learningRate", cfg.learning_rate},
          {"patchesPerImage", cfg.patches_per_image},
          {"seed", cfg.seed},
          {"lambda1", cfg.weights.lambda1},
          {"lambda2", cfg.weights.lambda2},
          {"lambda3", cfg.weights.lambda3},
          {"maskPolarity", to_string(cfg.polarity)}};
}

DenoiseConfig denoise_config_from_json(const nlohmann::json& j, DenoiseConfig base) {
  try {
    base.patch_size = j.value("patchSize", base.patch_size);
    base.stride = j.value("stride", base.stride);
    base.hidden = j.value("hidden", base.hidden);
    base.latent_channels = j.value("latentChannels", base.latent_channels);
    base.latent_side = j.value("latentSide", base.latent_side);
    base.se_reduction = j.value("seReduction", base.se_reduction);
    base.epochs = j.value("epochs", base.epochs);
    base.batch_size = j.value("batchSize", base.batch_size);
    base.learning_rate = j.value("learningRate", base.learning_rate);
    base.patches_per_image = j.value("patchesPerImage", base.patches_per_image);
    base.seed = j.value("seed", base.seed);
    base.weights.lambda1 = j.value("lambda1", base.weights.lambda1);
    base.weights.lambda2 = j.value("lambda2", base.weights.lambda2);
    base.weights.lambda3 = j.value("lambda3", base.weights.lambda3);
    if (j.contains("maskPolarity")) base.polarity = parse_mask_polarity(j["maskPolarity"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("denoise config: ") + e.what());
  }
  return base;
}

// ---- model ---------------------------------------------------------------------

void DenoiseModel::validate() const {
  encoder.validate();
  decoder.validate();
  se.validate();
  require(patch_size % 2 == 1 && patch_size >= 3, "denoise model: patch size must be odd");
  const std::size_t latent = latent_channels * latent_side * latent_side;
  require(encoder.input_dim() == patch_pixels() && decoder.output_dim() == patch_pixels(),
          "denoise model: encoder/decoder do not match the patch size");
  require(encoder.output_dim() == latent && decoder.input_dim() == latent && se.channels == latent_channels,
          "denoise model: latent dimensions do not chain");
  require(skip.size() == patch_pixels(), "denoise model: skip gains do not match the patch size");
}

std::vector<nn::ParamView> DenoiseModel::views() {
  std::vector<nn::ParamView> v;
  encoder.append_views("encoder", v);
  se.append_views("se", v);
  decoder.append_views("decoder", v);
  v.push_back({"skip", skip});
  return v;
}

DenoiseModel init_denoise_model(const DenoiseConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  DenoiseModel m;
  m.patch_size = cfg.patch_size;
  m.stride = cfg.stride;
  m.latent_channels = cfg.latent_channels;
  m.latent_side = cfg.latent_side;
  const std::size_t pixels = cfg.patch_size * cfg.patch_size;
  const std::size_t latent = cfg.latent_channels * cfg.latent_side * cfg.latent_side;
  const std::size_t enc[] = {pixels, cfg.hidden, latent};
  const std::size_t dec[] = {latent, cfg.hidden, pixels};
  m.encoder = nn::MlpParams::init(enc, rng);
  m.se = nn::SeGateParams::init(cfg.latent_channels, cfg.se_reduction, rng);
  m.decoder = nn::MlpParams::init(dec, rng);
  m.skip.assign(pixels, 1.0);
  // Start close to the identity map: the decoder's correction begins small.
  for (double& v : m.decoder.layers.back().weight) v *= 0.1;
  for (double& v : m.decoder.layers.back().bias) v *= 0.1;
  return m;
}

DenoiseModel zeros_like(const DenoiseModel& model) {
  DenoiseModel g = model;
  g.encoder = nn::MlpParams::zeros_like(model.encoder);
  g.decoder = nn::MlpParams::zeros_like(model.decoder);
  g.se = nn::SeGateParams::zeros_like(model.se);
  g.skip.assign(model.skip.size(), 0.0);
  return g;
}

// ---- forward / backward -----------------------------------------------------------

namespace {

struct ForwardState {
  nn::MlpCache enc_cache;
  nn::MlpCache dec_cache;
  std::vector<nn::SeCache> se_caches;
  std::vector<double> output;
};

ForwardState forward(const DenoiseModel& model, std::span<const double> patches, std::size_t count, bool keep) {
  const std::size_t p = model.patch_pixels();
  require(patches.size() == count * p, "denoiser: patch buffer size mismatch");
  ForwardState st;
  const nn::Tensor x({count, p}, std::vector<double>(patches.begin(), patches.end()));
  const nn::Tensor latent = nn::mlp_forward(model.encoder, x, keep ? &st.enc_cache : nullptr);
  const std::size_t l = latent.dim(1);
  nn::Tensor gated({count, l});
  if (keep) st.se_caches.resize(count);
  for (std::size_t b = 0; b < count; ++b) {
    const auto row = latent.data().subspan(b * l, l);
    const nn::Tensor map({model.latent_channels, model.latent_side, model.latent_side},
                         std::vector<double>(row.begin(), row.end()));
    const nn::Tensor g = nn::se_gate(map, model.se, keep ? &st.se_caches[b] : nullptr);
    std::copy(g.data().begin(), g.data().end(), gated.data().begin() + static_cast<long>(b * l));
  }
  const nn::Tensor correction = nn::mlp_forward(model.decoder, gated, keep ? &st.dec_cache : nullptr);
  st.output.resize(count * p);
  for (std::size_t i = 0; i < st.output.size(); ++i) st.output[i] = model.skip[i % p] * patches[i] + correction[i];
  return st;
}

void add_into(nn::MlpParams& acc, const nn::MlpParams& g) {
  for (std::size_t li = 0; li < acc.layers.size(); ++li) {
    for (std::size_t i = 0; i < acc.layers[li].weight.size(); ++i) acc.layers[li].weight[i] += g.layers[li].weight[i];
    for (std::size_t i = 0; i < acc.layers[li].bias.size(); ++i) acc.layers[li].bias[i] += g.layers[li].bias[i];
  }
}

}  // namespace

std::vector<double> denoise_patches(const DenoiseModel& model, std::span<const double> patches, std::size_t count) {
  if (count == 0) return {};
  return forward(model, patches, count, false).output;
}

PatchLoss patch_loss_and_grad(const DenoiseModel& model, const PatchBatch& batch, const LossWeights& weights,
                              MaskPolarity polarity) {
  weights.validate();
  require(batch.count > 0, "denoiser: empty patch batch");
  require(batch.patch_size == model.patch_size, "denoiser: batch patch size differs from the model");
  const std::size_t p = model.patch_pixels();
  require(batch.noisy.size() == batch.count * p && batch.clean.size() == batch.count * p &&
              batch.mask.size() == batch.count * p,
          "denoiser: patch batch buffers are inconsistent");

  ForwardState st = forward(model, batch.noisy, batch.count, true);
  PatchLoss out;
  out.grad = zeros_like(model);
  const double inv = 1.0 / static_cast<double>(batch.count);
  nn::Tensor d_out({batch.count, p});
  std::vector<double> diff(p), grad;
  for (std::size_t b = 0; b < batch.count; ++b) {
    for (std::size_t i = 0; i < p; ++i) diff[i] = st.output[b * p + i] - batch.clean[b * p + i];
    const std::span<const double> mask(batch.mask.data() + b * p, p);
    out.value += inv * region_loss_flat(diff, mask, model.patch_size, model.patch_size, 1, weights, polarity, &grad);
    for (std::size_t i = 0; i < p; ++i) {
      d_out[b * p + i] = inv * grad[i];
      out.grad.skip[i] += inv * grad[i] * batch.noisy[b * p + i];
    }
  }

  nn::MlpBackward dec_back = nn::mlp_backward(model.decoder, st.dec_cache, d_out);
  out.grad.decoder = std::move(dec_back.param_grads);
  const std::size_t l = dec_back.input_grad.dim(1);
  nn::Tensor d_latent({batch.count, l});
  for (std::size_t b = 0; b < batch.count; ++b) {
    const auto row = dec_back.input_grad.data().subspan(b * l, l);
    const nn::Tensor up({model.latent_channels, model.latent_side, model.latent_side},
                        std::vector<double>(row.begin(), row.end()));
    nn::SeBackward se_back = nn::se_gate_backward(model.se, st.se_caches[b], up);
    for (std::size_t i = 0; i < out.grad.se.w1.size(); ++i) out.grad.se.w1[i] += se_back.param_grads.w1[i];
    for (std::size_t i = 0; i < out.grad.se.w2.size(); ++i) out.grad.se.w2[i] += se_back.param_grads.w2[i];
    std::copy(se_back.input_grad.data().begin(), se_back.input_grad.data().end(),
              d_latent.data().begin() + static_cast<long>(b * l));
  }
  add_into(out.grad.encoder, nn::mlp_backward(model.encoder, st.enc_cache, d_latent).param_grads);
  return out;
}

// ---- training -----------------------------------------------------------------------

PatchBatch sample_patches(const std::vector<DenoisePair>& pairs, std::size_t patch_size, std::size_t per_image,
                          std::uint64_t seed) {
  PatchBatch batch;
  batch.patch_size = patch_size;
  std::mt19937_64 rng(seed);
  for (const auto& pair : pairs) {
    require(pair.noisy.same_shape(pair.clean), "denoiser: noisy and clean images differ in shape");
    require(pair.mask.height() == pair.noisy.height() && pair.mask.width() == pair.noisy.width(),
            "denoiser: region mask shape differs from the image");
    require(pair.noisy.height() >= patch_size && pair.noisy.width() >= patch_size,
            "denoiser: image smaller than the patch size");
    std::uniform_int_distribution<std::size_t> ys(0, pair.noisy.height() - patch_size);
    std::uniform_int_distribution<std::size_t> xs(0, pair.noisy.width() - patch_size);
    std::uniform_int_distribution<std::size_t> cs(0, pair.noisy.channels() - 1);
    for (std::size_t k = 0; k < per_image; ++k) {
      const std::size_t y0 = ys(rng), x0 = xs(rng), ch = cs(rng);
      for (std::size_t y = 0; y < patch_size; ++y)
        for (std::size_t x = 0; x < patch_size; ++x) {
          batch.noisy.push_back(pair.noisy.at(y0 + y, x0 + x, ch));
          batch.clean.push_back(pair.clean.at(y0 + y, x0 + x, ch));
          batch.mask.push_back(pair.mask.at(y0 + y, x0 + x));
        }
      ++batch.count;
    }
  }
  return batch;
}

DenoiseTrainResult train_on_patches(const PatchBatch& patches, const DenoiseConfig& cfg) {
  cfg.validate();
  if (patches.count == 0) throw DomainError("train_patch_denoiser: no training patches");
  require(patches.patch_size == cfg.patch_size, "train_patch_denoiser: patch size mismatch");
  std::mt19937_64 rng(cfg.seed);
  DenoiseTrainResult result;
  result.model = init_denoise_model(cfg, rng());
  nn::AdamState adam;
  adam.learning_rate = cfg.learning_rate;
  const std::size_t p = cfg.patch_size * cfg.patch_size;
  std::vector<std::size_t> order(patches.count);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      PatchBatch batch;
      batch.patch_size = cfg.patch_size;
      batch.count = end - start;
      for (std::size_t i = start; i < end; ++i) {
        const auto off = static_cast<long>(order[i] * p);
        batch.noisy.insert(batch.noisy.end(), patches.noisy.begin() + off, patches.noisy.begin() + off + static_cast<long>(p));
        batch.clean.insert(batch.clean.end(), patches.clean.begin() + off, patches.clean.begin() + off + static_cast<long>(p));
        batch.mask.insert(batch.mask.end(), patches.mask.begin() + off, patches.mask.begin() + off + static_cast<long>(p));
      }
      PatchLoss pl = patch_loss_and_grad(result.model, batch, cfg.weights, cfg.polarity);
      loss_sum += pl.value * static_cast<double>(batch.count);
      auto params = result.model.views();
      auto grads = pl.grad.views();
      nn::adam_step(adam, params, grads);
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(patches.count));
  }
  return result;
}

DenoiseTrainResult train_patch_denoiser(const std::vector<DenoisePair>& pairs, const DenoiseConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw DomainError("train_patch_denoiser: no training pairs");
  const PatchBatch patches =
      sample_patches(pairs, cfg.patch_size, cfg.patches_per_image, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  return train_on_patches(patches, cfg);
}

// ---- inference ------------------------------------------------------------------------

namespace {

std::vector<std::size_t> patch_origins(std::size_t extent, std::size_t patch, std::size_t stride) {
  std::vector<std::size_t> origins;
  for (std::size_t o = 0; o + patch <= extent; o += stride) origins.push_back(o);
  if (origins.back() + patch < extent) origins.push_back(extent - patch);
  return origins;
}

}  // namespace

Raster denoise_image(const DenoiseModel& model, const Raster& noisy) {
  model.validate();
  const std::size_t ps = model.patch_size;
  if (noisy.height() < ps || noisy.width() < ps)
    throw DomainError("denoise_image: image smaller than the patch size");
  const auto ys = patch_origins(noisy.height(), ps, model.stride);
  const auto xs = patch_origins(noisy.width(), ps, model.stride);
  const std::size_t h = noisy.height(), w = noisy.width(), c = noisy.channels();
  Raster out(h, w, c);
  std::vector<double> counts(h * w, 0.0);
  for (std::size_t y0 : ys)
    for (std::size_t x0 : xs)
      for (std::size_t y = 0; y < ps; ++y)
        for (std::size_t x = 0; x < ps; ++x) counts[(y0 + y) * w + x0 + x] += 1.0;

  const std::size_t count = ys.size() * xs.size();
  std::vector<double> patches(count * ps * ps);
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::size_t k = 0;
    for (std::size_t y0 : ys)
      for (std::size_t x0 : xs) {
        for (std::size_t y = 0; y < ps; ++y)
          for (std::size_t x = 0; x < ps; ++x) patches[k * ps * ps + y * ps + x] = noisy.at(y0 + y, x0 + x, ch);
        ++k;
      }
    const std::vector<double> restored = denoise_patches(model, patches, count);
    k = 0;
    for (std::size_t y0 : ys)
      for (std::size_t x0 : xs) {
        for (std::size_t y = 0; y < ps; ++y)
          for (std::size_t x = 0; x < ps; ++x) out.at(y0 + y, x0 + x, ch) += restored[k * ps * ps + y * ps + x];
        ++k;
      }
  }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) {
        double& v = out.at(y, x, ch);
        v = std::clamp(v / counts[y * w + x], 0.0, 1.0);
      }
  return out;
}

Raster uniform_filter(const Raster& img, int kernel) {
  require(kernel >= 1 && kernel % 2 == 1, "uniform filter: kernel size must be odd and positive");
  Raster out(img.height(), img.width(), img.channels());
  for (std::size_t ch = 0; ch < img.channels(); ++ch) {
    const Plane smooth = imaging::convolve_uniform(channel_plane(img, ch), kernel);
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 0; x < img.width(); ++x) out.at(y, x, ch) = smooth.at(y, x);
  }
  return out;
}

Raster baseline_region_filter(const Raster& noisy, const RegionMask& mask, int strong_kernel, int weak_kernel) {
  require(strong_kernel >= 1 && weak_kernel >= 1 && strong_kernel % 2 == 1 && weak_kernel % 2 == 1,
          "baseline filter: kernel sizes must be odd and positive");
  require(strong_kernel >= weak_kernel, "baseline filter: strong kernel must be at least the weak kernel");
  require(mask.height() == noisy.height() && mask.width() == noisy.width(),
          "baseline filter: mask shape differs from the image");
  const Raster strong = uniform_filter(noisy, strong_kernel);
  const Raster weak = uniform_filter(noisy, weak_kernel);
  Raster out(noisy.height(), noisy.width(), noisy.channels());
  for (std::size_t y = 0; y < noisy.height(); ++y)
    for (std::size_t x = 0; x < noisy.width(); ++x) {
      const double m = mask.at(y, x);
      for (std::size_t ch = 0; ch < noisy.channels(); ++ch)
        out.at(y, x, ch) = m * weak.at(y, x, ch) + (1.0 - m) * strong.at(y, x, ch);
    }
  return out;
}

// ---- persistence -----------------------------------------------------------------------

void save_model(const DenoiseModel& model, const std::filesystem::path& path, const nlohmann::json& extra) {
  model.validate();
  std::vector<nn::NamedTensor> tensors;
  nn::append_tensors("encoder", model.encoder, tensors);
  nn::append_tensors("se", model.se, tensors);
  nn::append_tensors("decoder", model.decoder, tensors);
  tensors.push_back({"skip", nn::Tensor::vector(model.skip)});
  nlohmann::json hyper = extra;
  hyper["kind"] = "patch-denoiser";
  hyper["patchSize"] = model.patch_size;
  hyper["stride"] = model.stride;
  hyper["latentChannels"] = model.latent_channels;
  hyper["latentSide"] = model.latent_side;
  nn::save_checkpoint(path, tensors, hyper);
}

DenoiseModel load_model(const std::filesystem::path& path) {
  const nn::LoadedCheckpoint ckpt = nn::load_checkpoint(path);
  DenoiseModel m;
  m.encoder = nn::read_mlp("encoder", ckpt);
  m.se = nn::read_se("se", ckpt);
  m.decoder = nn::read_mlp("decoder", ckpt);
  const nn::Tensor& skip = ckpt.get("skip");
  m.skip.assign(skip.data().begin(), skip.data().end());
  const auto& h = ckpt.hyperparameters;
  try {
    m.patch_size = h.at("patchSize").get<std::size_t>();
    m.stride = h.at("stride").get<std::size_t>();
    m.latent_channels = h.at("latentChannels").get<std::size_t>();
    m.latent_side = h.at("latentSide").get<std::size_t>();
    m.validate();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("denoiser checkpoint metadata: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("denoiser checkpoint: ") + e.what());
  }
  return m;
}

}  // namespace sonarfuse::denoise

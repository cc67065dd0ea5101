// End-to-end acceptance run. Each criterion prints one PASS/FAIL line; the exit status is
// non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sonarfuse/denoiser.hpp"
#include "sonarfuse/error.hpp"
#include "sonarfuse/fusion.hpp"
#include "sonarfuse/imaging.hpp"
#include "sonarfuse/metrics.hpp"
#include "sonarfuse/nn.hpp"
#include "sonarfuse/noise.hpp"
#include "sonarfuse/scene.hpp"
#include "sonarfuse/segmentation.hpp"

namespace fs = std::filesystem;
using namespace sonarfuse;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Checks {
 public:
  void expect(bool condition, const std::string& what) {
    if (!condition && failures_.size() < 5) failures_.push_back(what);
    ok_ = ok_ && condition;
  }
  bool ok() const { return ok_; }
  std::string failures() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  bool ok_ = true;
  std::vector<std::string> failures_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// ---- 1. attention normalization ------------------------------------------------------------

Outcome attention_normalization() {
  Checks c;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> log_scale(-6.0, 6.0);
  double worst_sum = 0.0, worst_scale = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const fusion::ModelShape shape{8, 32, 16, 5};
    const fusion::FusionModel model = fusion::init_fusion_model(shape, static_cast<std::uint64_t>(t));
    const double sd = std::exp(log_scale(rng) / 3.0);
    const nn::Tensor h1 = nn::Tensor::vector(gaussian(shape.attention_dim, rng, sd));
    const nn::Tensor h2 = nn::Tensor::vector(gaussian(shape.attention_dim, rng, sd));
    const fusion::AttentionWeights w = fusion::attention_weights(h1, h2, model);
    worst_sum = std::max(worst_sum, std::abs(w.alpha + w.beta - 1.0));
    c.expect(w.alpha >= 0.0 && w.alpha <= 1.0 && w.beta >= 0.0 && w.beta <= 1.0, "weight outside [0,1]");

    nn::Tensor a = nn::mlp_forward(model.att1, h1);
    nn::Tensor b = nn::mlp_forward(model.att2, h2);
    const double s = std::exp(log_scale(rng));
    for (double& v : a.data()) v *= s;
    for (double& v : b.data()) v *= s;
    const fusion::AttentionWeights ws = fusion::normalize_attention(a.data(), b.data());
    worst_scale = std::max({worst_scale, std::abs(ws.alpha - w.alpha), std::abs(ws.beta - w.beta)});
  }
  c.expect(worst_sum <= 1e-12, "alpha+beta deviates by " + fmt(worst_sum));
  c.expect(worst_scale <= 1e-12, "scaling changes weights by " + fmt(worst_scale));
  return {c.ok(), "10^4 triples, max |a+b-1| = " + fmt(worst_sum) + ", max scale drift = " + fmt(worst_scale) +
                      (c.ok() ? "" : " | " + c.failures())};
}

// ---- 2. gradient correctness -------------------------------------------------------------------

Outcome gradient_correctness() {
  Checks c;
  double worst = 0.0;
  int models = 0;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    std::mt19937_64 rng(seed * 7919 + 1);
    const fusion::ModelShape shape{4 + seed % 4, 5 + seed % 3, 3 + seed % 2, 2 + seed % 4};
    fusion::FusionModel model = fusion::init_fusion_model(shape, seed);
    model.lambda = seed % 3 == 0 ? -0.01 : (seed % 3 == 1 ? 0.3 : -0.5);
    // Random standardization so the normalizers are exercised too (they are constants).
    model.norm1.mean = gaussian(shape.feature_dim, rng, 0.2);
    model.norm2.mean = gaussian(shape.feature_dim, rng, 0.2);
    std::vector<fusion::LabeledFeatures> batch;
    for (std::size_t i = 0; i < 5; ++i)
      batch.push_back({"s" + std::to_string(i),
                       {gaussian(shape.feature_dim, rng), gaussian(shape.feature_dim, rng)},
                       i % shape.classes});
    const fusion::BatchLoss analytic = fusion::loss_and_grad(model, batch);
    fusion::FusionModel grad = analytic.grad;
    auto params = model.views();
    auto grads = grad.views();
    const nn::GradCheckReport rep = nn::finite_difference_check(
        [&] { return fusion::batch_loss(model, batch); }, params, grads, 1e-5);
    worst = std::max(worst, rep.max_relative_error);
    c.expect(rep.passed, "fusion seed " + std::to_string(seed) + " " + rep.worst_parameter);
    ++models;
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    denoise::DenoiseConfig cfg;
    cfg.patch_size = 5;
    cfg.hidden = 10;
    cfg.latent_channels = 4;
    cfg.latent_side = 2;
    cfg.se_reduction = 2;
    denoise::DenoiseModel model = denoise::init_denoise_model(cfg, seed);
    std::mt19937_64 rng(seed + 500);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    denoise::PatchBatch batch;
    batch.count = 3;
    batch.patch_size = cfg.patch_size;
    for (std::size_t i = 0; i < 3 * 25; ++i) {
      batch.clean.push_back(u(rng));
      batch.noisy.push_back(u(rng));
      batch.mask.push_back(u(rng));
    }
    const denoise::LossWeights w{0.5 + u(rng), 0.5 + u(rng), seed % 2 ? 0.2 : 0.0};
    const auto pol = seed % 4 == 3 ? denoise::MaskPolarity::Direct : denoise::MaskPolarity::Complement;
    denoise::PatchLoss pl = denoise::patch_loss_and_grad(model, batch, w, pol);
    auto params = model.views();
    auto grads = pl.grad.views();
    const nn::GradCheckReport rep = nn::finite_difference_check(
        [&] { return denoise::patch_loss_and_grad(model, batch, w, pol).value; }, params, grads, 1e-5);
    worst = std::max(worst, rep.max_relative_error);
    c.expect(rep.passed, "denoiser seed " + std::to_string(seed) + " " + rep.worst_parameter);
    ++models;
  }
  return {c.ok(), std::to_string(models) + " models (24 fusion, 20 denoiser), max rel err = " + fmt(worst) +
                      (c.ok() ? "" : " | " + c.failures())};
}

// ---- 3. ordering on the synthetic benchmark --------------------------------------------------------

scene::DatasetOptions benchmark_options(std::size_t per_class, std::uint64_t seed, const fs::path& dir) {
  scene::DatasetOptions o;
  o.count_per_class = per_class;
  o.seed = seed;
  o.image_size = 96;
  o.pixels_per_meter = 6.0;
  o.noise = noise::named_profile("default");
  o.output_dir = dir;
  return o;
}

Outcome ordering_reproduction(const fs::path& work) {
  const scene::GenerationResult train = scene::generate_dataset(benchmark_options(240, 1, work / "train"));
  const scene::GenerationResult test = scene::generate_dataset(benchmark_options(60, 1001, work / "test"));
  if (!train.failures.empty() || !test.failures.empty()) return {false, "scene generation failures"};
  const auto ft = fusion::featurize_manifest(train.manifest, fusion::MaskSource::GroundTruth);
  const auto fe = fusion::featurize_manifest(test.manifest, fusion::MaskSource::GroundTruth, ft.class_names);
  if (ft.data.size() != 1200 || fe.data.size() != 300) return {false, "unexpected dataset size"};
  std::map<fusion::AlphaMode, double> acc;
  double adaptive_alpha = 0.0;
  for (auto mode : {fusion::AlphaMode::Adaptive, fusion::AlphaMode::CombinedOnly, fusion::AlphaMode::ShadowOnly}) {
    fusion::TrainConfig cfg;
    cfg.mode = mode;
    cfg.seed = 7;
    const fusion::TrainResult r = fusion::train_fusion(ft.data, ft.class_names, cfg);
    const fusion::EvalReport rep = fusion::evaluate(r.model, fe.data);
    acc[mode] = rep.accuracy;
    if (mode == fusion::AlphaMode::Adaptive) {
      for (const auto& im : rep.images) adaptive_alpha += im.alpha;
      adaptive_alpha /= static_cast<double>(rep.images.size());
    }
  }
  const double a = acc[fusion::AlphaMode::Adaptive];
  const double cmb = acc[fusion::AlphaMode::CombinedOnly];
  const double shd = acc[fusion::AlphaMode::ShadowOnly];
  const bool ok = a >= cmb - 0.01 && a >= shd - 0.01 && a >= shd;
  return {ok, "1200/300 images: adaptive " + fmt(a) + " (mean alpha " + fmt(adaptive_alpha, 3) +
                  "), combined-only " + fmt(cmb) + ", shadow-only " + fmt(shd)};
}

// ---- 4. shadow segmentation -------------------------------------------------------------------

Outcome segmentation_quality() {
  Checks c;
  scene::DatasetOptions o = benchmark_options(20, 404, {});
  double total = 0.0;
  std::size_t n = 0;
  for (scene::ObjectClass label : o.classes)
    for (std::size_t i = 0; i < o.count_per_class; ++i) {
      const scene::SceneRecord rec = scene::render_scene(scene::sample_spec(o, label, i));
      try {
        total += metrics::iou(segmentation::segment_shadows(rec.image, {}), rec.shadow_mask);
      } catch (const std::exception& e) {
        c.expect(false, std::string("scene crashed: ") + e.what());
      }
      ++n;
    }
  const double mean_iou = total / static_cast<double>(n);
  c.expect(n == 100, "expected 100 scenes");
  c.expect(mean_iou >= 0.6, "mean IoU " + fmt(mean_iou));
  int uniform_ok = 0;
  for (double v : {0.0, 0.3, 1.0}) {
    for (std::size_t ch : {1u, 3u}) {
      try {
        const ShadowMask m = segmentation::segment_shadows(Raster(40, 40, ch, v), {});
        c.expect(m.height() == 40 && m.width() == 40, "uniform image mask has wrong shape");
        ++uniform_ok;
      } catch (const std::exception& e) {
        c.expect(false, std::string("uniform image crashed: ") + e.what());
      }
    }
  }
  return {c.ok(), "100 scenes, mean IoU = " + fmt(mean_iou) + ", uniform images handled " +
                      std::to_string(uniform_ok) + "/6" + (c.ok() ? "" : " | " + c.failures())};
}

// ---- 5. noise statistics ------------------------------------------------------------------------

Outcome noise_statistics() {
  Checks c;
  const Raster half(317, 317, 1, 0.5);  // 100,489 pixels
  const Raster speckled = noise::apply_backscatter(half, {4.0}, 99);
  double mean = 0.0;
  for (double v : speckled.data()) mean += v;
  mean /= static_cast<double>(speckled.data().size());
  const double rel = std::abs(mean - 0.5) / 0.5;
  c.expect(rel <= 0.02, "backscatter mean off by " + fmt(100 * rel) + "%");

  double worst_kernel = 0.0, worst_const = 0.0;
  for (double decay : {0.1, 0.5, 0.6, 0.9, 0.99})
    for (int length : {1, 3, 5, 12})
      for (double mix : {0.0, 0.3, 1.0}) {
        const noise::ReverbParams p{decay, length, mix};
        const auto k = noise::reverb_kernel(p);
        double sum = 0.0;
        for (double v : k) sum += v;
        worst_kernel = std::max(worst_kernel, std::abs(sum - 1.0));
        for (double level : {0.0, 0.37, 1.0}) {
          const Raster flat(24, 20, 3, level);
          for (auto axis : {noise::RangeAxis::Rows, noise::RangeAxis::Columns}) {
            const Raster out = noise::apply_reverberation(flat, p, axis);
            for (double v : out.data()) worst_const = std::max(worst_const, std::abs(v - level));
          }
        }
      }
  c.expect(worst_kernel <= 1e-12, "reverb kernel sum error " + fmt(worst_kernel));
  c.expect(worst_const <= 1e-9, "reverb changes constant image by " + fmt(worst_const));

  // Autocorrelation along range of (output - input) against the input point pattern.
  const std::vector<int> delays{3, 7, 12};
  noise::MultipathParams mp;
  for (int d : delays) mp.paths.push_back({d, 0.3});
  const std::size_t h = 64, w = 48;
  Raster points(h, w, 1, 0.0);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> ry(0, h - 1), rx(0, w - 1);
  for (int i = 0; i < 40; ++i) points.at(ry(rng), rx(rng)) = 0.6;
  const Raster echoed = noise::apply_multipath(points, mp);
  std::vector<double> corr(25, 0.0);
  for (std::size_t lag = 1; lag < corr.size(); ++lag)
    for (std::size_t y = 0; y + lag < h; ++y)
      for (std::size_t x = 0; x < w; ++x) corr[lag] += points.at(y, x) * echoed.at(y + lag, x);
  bool peaks_ok = true;
  for (int d : delays) {
    const auto lag = static_cast<std::size_t>(d);
    peaks_ok = peaks_ok && corr[lag] > corr[lag - 1] && corr[lag] > corr[lag + 1];
  }
  c.expect(peaks_ok, "multipath autocorrelation lacks a peak at a configured delay");
  return {c.ok(), "backscatter mean " + fmt(mean, 6) + " (" + fmt(100 * rel, 3) + "% off), kernel sum err " +
                      fmt(worst_kernel) + ", constant drift " + fmt(worst_const) + ", peaks at 3/7/12: " +
                      (peaks_ok ? "yes" : "no") + (c.ok() ? "" : " | " + c.failures())};
}

// ---- 6. denoising improvement -------------------------------------------------------------------

struct NoisyScene {
  Raster clean;
  Raster noisy;
  RegionMask region;
};

std::vector<NoisyScene> noisy_scenes(std::size_t per_class, std::uint64_t seed) {
  scene::DatasetOptions o = benchmark_options(per_class, seed, {});
  std::vector<NoisyScene> out;
  std::uint64_t k = 0;
  for (scene::ObjectClass label : o.classes)
    for (std::size_t i = 0; i < per_class; ++i) {
      const scene::SceneRecord rec = scene::render_scene(scene::sample_spec(o, label, i));
      out.push_back({rec.image, noise::apply_profile(rec.image, o.noise, scene::derive_seed(seed, 77, k++)),
                     scene::region_mask_from_scene(rec.highlight_mask, rec.shadow_mask)});
    }
  return out;
}

Outcome denoising_improvement() {
  Checks c;
  const auto train = noisy_scenes(20, 61);
  const auto held_out = noisy_scenes(10, 62);
  std::vector<denoise::DenoisePair> pairs;
  for (const auto& s : train) pairs.push_back({s.noisy, s.clean, s.region});
  denoise::DenoiseConfig cfg;
  cfg.seed = 3;
  const denoise::DenoiseModel model = denoise::train_patch_denoiser(pairs, cfg).model;
  const int strong = 7, weak = 3;
  double ssim_noisy = 0.0, ssim_model = 0.0, ssim_base = 0.0, mse_base = 0.0, mse_uniform = 0.0;
  for (const auto& s : held_out) {
    const Plane ref = to_gray(s.clean);
    const Raster den = denoise::denoise_image(model, s.noisy);
    const Raster base = denoise::baseline_region_filter(s.noisy, s.region, strong, weak);
    const Raster uni = denoise::uniform_filter(s.noisy, strong);
    ssim_noisy += metrics::ssim(to_gray(s.noisy), ref);
    ssim_model += metrics::ssim(to_gray(den), ref);
    ssim_base += metrics::ssim(to_gray(base), ref);
    mse_base += metrics::weighted_mse(to_gray(base), ref, s.region);
    mse_uniform += metrics::weighted_mse(to_gray(uni), ref, s.region);
  }
  const double n = static_cast<double>(held_out.size());
  ssim_noisy /= n;
  ssim_model /= n;
  ssim_base /= n;
  mse_base /= n;
  mse_uniform /= n;
  c.expect(held_out.size() == 50, "expected 50 held-out scenes");
  c.expect(ssim_model - ssim_noisy >= 0.05, "denoiser SSIM gain " + fmt(ssim_model - ssim_noisy));
  c.expect(ssim_base - ssim_noisy >= 0.05, "baseline SSIM gain " + fmt(ssim_base - ssim_noisy));
  c.expect(mse_base <= mse_uniform, "baseline masked MSE above uniform filter");
  return {c.ok(), "50 scenes, SSIM noisy " + fmt(ssim_noisy) + " -> denoiser " + fmt(ssim_model) + ", baseline " +
                      fmt(ssim_base) + "; masked MSE baseline " + fmt(mse_base) + " vs uniform " +
                      fmt(mse_uniform) + (c.ok() ? "" : " | " + c.failures())};
}

// ---- 7. oracle equivalence ------------------------------------------------------------------

// Optimal 1-D k-means objective by exhaustive enumeration of contiguous partitions of the
// sorted values (an optimal clustering in 1-D is always contiguous).
double brute_force_objective(std::vector<double> v, std::size_t k) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  double best = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t lo, std::size_t hi) {
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mean += v[i];
    mean /= static_cast<double>(hi - lo);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += (v[i] - mean) * (v[i] - mean);
    return s;
  };
  if (k == 1) return cost(0, n);
  for (std::size_t a = 1; a < n; ++a) {
    if (k == 2) {
      best = std::min(best, cost(0, a) + cost(a, n));
      continue;
    }
    for (std::size_t b = a + 1; b < n; ++b) best = std::min(best, cost(0, a) + cost(a, b) + cost(b, n));
  }
  return best;
}

Outcome oracle_equivalence() {
  Checks c;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int sets = 0, mismatches = 0;
  for (int t = 0; t < 3000; ++t) {
    const std::size_t n = static_cast<std::size_t>(size(rng));
    std::vector<double> v(n);
    const int style = t % 3;
    for (double& x : v) x = style == 0 ? u(rng) : (style == 1 ? std::floor(u(rng) * 4) / 4 : u(rng) * u(rng) * 10);
    std::vector<double> distinct = v;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t k = 1; k <= 3; ++k) {
      const imaging::KMeansResult r = imaging::kmeans_1d(v, k, static_cast<std::uint64_t>(t));
      const double oracle = brute_force_objective(v, std::min(k, distinct.size()));
      ++sets;
      if (std::abs(r.objective - oracle) > 1e-12 * std::max(1.0, oracle)) ++mismatches;
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " k-means mismatches");
  const double h_half = nn::attention_entropy(std::vector<double>{0.5, 0.5}).value;
  const double h_one = nn::attention_entropy(std::vector<double>{1.0, 0.0}).value;
  c.expect(std::abs(h_half - std::log(2.0)) <= 1e-12, "entropy of (0.5,0.5)");
  c.expect(h_one == 0.0, "one-hot entropy");
  double worst_ssim = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 r(s);
    Plane p(32 + s, 40, 0.0);
    for (double& x : p.data()) x = u(r);
    worst_ssim = std::max(worst_ssim, std::abs(metrics::ssim(p, p) - 1.0));
  }
  c.expect(worst_ssim <= 1e-12, "SSIM(x,x) off by " + fmt(worst_ssim));
  return {c.ok(), std::to_string(sets) + " k-means sets, " + std::to_string(mismatches) +
                      " mismatches; H(0.5,0.5)-ln2 = " + fmt(h_half - std::log(2.0)) + ", H(1,0) = " + fmt(h_one) +
                      ", max |SSIM(x,x)-1| = " + fmt(worst_ssim) + (c.ok() ? "" : " | " + c.failures())};
}

// ---- 8. determinism of the CLI pipeline ------------------------------------------------------

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

int run_cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(SONARFUSE_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >> " + quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == "log.txt") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = os.str();
  }
  return files;
}

bool run_pipeline(const fs::path& root, std::string* error) {
  const fs::path log = root / "log.txt";
  const std::string train = (root / "train").string(), test = (root / "test").string();
  const std::vector<std::vector<std::string>> steps{
      {"gen-data", "--out", train, "--count", "40", "--size", "96", "--ppm", "6", "--seed", "21"},
      {"gen-data", "--out", test, "--count", "10", "--size", "96", "--ppm", "6", "--seed", "22"},
      {"add-noise", "--manifest", train + "/manifest.json", "--profile", "default", "--seed", "5"},
      {"add-noise", "--manifest", test + "/manifest.json", "--profile", "default", "--seed", "6"},
      {"segment", "--manifest", train + "/manifest.noisy.json", "--seed", "7"},
      {"segment", "--manifest", test + "/manifest.noisy.json", "--seed", "7"},
      {"train-fusion", "--manifest", train + "/manifest.segmented.json", "--mask-source", "predicted", "--out",
       (root / "fusion.ssnn").string(), "--epochs", "20", "--seed", "9"},
      {"eval-fusion", "--manifest", test + "/manifest.segmented.json", "--mask-source", "predicted", "--model",
       (root / "fusion.ssnn").string(), "--out", (root / "report.json").string(), "--csv",
       (root / "report.csv").string()},
  };
  for (const auto& s : steps) {
    const int code = run_cli(s, log);
    if (code != 0) {
      *error = s[0] + " exited with " + std::to_string(code);
      return false;
    }
  }
  return true;
}

Outcome pipeline_determinism(const fs::path& work) {
  const fs::path root = work / "pipeline";
  std::map<std::string, std::string> first;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(root);
    fs::create_directories(root);
    std::string error;
    if (!run_pipeline(root, &error)) return {false, "round " + std::to_string(round + 1) + ": " + error};
    if (round == 0) {
      first = snapshot(root);
      continue;
    }
    const auto second = snapshot(root);
    std::size_t masks = 0, differing = 0;
    std::string first_diff;
    for (const auto& [name, bytes] : first) {
      if (name.find("masks-pred") != std::string::npos) ++masks;
      const auto it = second.find(name);
      if (it == second.end() || it->second != bytes) {
        ++differing;
        if (first_diff.empty()) first_diff = name;
      }
    }
    const bool ok = differing == 0 && first.size() == second.size() && masks == 250 &&
                    first.count("fusion.ssnn") && first.count("report.json");
    return {ok, std::to_string(first.size()) + " files (" + std::to_string(masks) +
                    " predicted masks, manifests, checkpoint, reports, provenance), " + std::to_string(differing) +
                    " differ" + (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
  }
  return {false, "unreachable"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "sonarfuse_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"attention normalization", attention_normalization},
      {"gradient correctness", gradient_correctness},
      {"fusion ordering benchmark", [&] { return ordering_reproduction(work); }},
      {"shadow segmentation", segmentation_quality},
      {"noise statistics", noise_statistics},
      {"denoising improvement", denoising_improvement},
      {"oracle equivalence", oracle_equivalence},
      {"pipeline determinism", [&] { return pipeline_determinism(work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " — " << o.detail
              << " (" << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat << std::endl;
  }
  fs::remove_all(work);
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}

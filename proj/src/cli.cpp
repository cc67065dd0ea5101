#include "sonarfuse/cli.hpp"

#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <type_traits>

#include "CLI11.hpp"
#include "json.hpp"
#include "sonarfuse/denoiser.hpp"
#include "sonarfuse/error.hpp"
#include "sonarfuse/fusion.hpp"
#include "sonarfuse/image_io.hpp"
#include "sonarfuse/metrics.hpp"
#include "sonarfuse/noise.hpp"
#include "sonarfuse/scene.hpp"
#include "sonarfuse/segmentation.hpp"

namespace sonarfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream identifiers for per-image seeds derived from the global seed.
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

/// Option registry that lets a JSON config file fill any option the user did not pass, and
/// that can echo the effective configuration.
class Settings {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flags, const std::string& key, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option(flags, var, help);
    bindings_.push_back({key, opt, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flags, const std::string& key, bool& var,
                        const std::string& help) {
    CLI::Option* opt = app->add_flag(flags, var, help);
    bindings_.push_back({key, opt, [&var](const json& j) { var = j.get<bool>(); }, [&var] { return json(var); }});
    return opt;
  }

  void add_config_option(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON file with default values for this command");
  }

  /// Flags override config values override built-in defaults.
  void apply_config(const std::string& subcommand) {
    if (config_path_.empty()) return;
    json cfg;
    try {
      cfg = json::parse(io::read_text(config_path_));
    } catch (const json::parse_error& e) {
      throw DomainError("config file " + config_path_ + ": " + e.what());
    }
    if (!cfg.is_object()) throw DomainError("config file " + config_path_ + ": expected a JSON object");
    if (cfg.contains(subcommand) && cfg[subcommand].is_object()) cfg = cfg[subcommand];
    for (const auto& b : bindings_) {
      if (b.option->count() > 0 || !cfg.contains(b.key)) continue;
      try {
        b.from_json(cfg[b.key]);
      } catch (const json::exception& e) {
        throw DomainError("config key '" + b.key + "': " + e.what());
      }
    }
  }

  json effective() const {
    json j = json::object();
    for (const auto& b : bindings_) j[b.key] = b.to_json();
    return j;
  }

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<void(const json&)> from_json;
    std::function<json()> to_json;
  };
  std::vector<Binding> bindings_;
  std::string config_path_;
};

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

void write_provenance(const fs::path& path, const std::string& subcommand, std::uint64_t seed, const json& config,
                      const std::vector<std::string>& outputs) {
  write_json(path, {{"tool", kToolVersion},
                    {"subcommand", subcommand},
                    {"seed", seed},
                    {"config", config},
                    {"outputs", outputs}});
}

fs::path provenance_for_file(const fs::path& output) {
  fs::path p = output;
  p += ".provenance.json";
  return p;
}

fs::path manifest_dir(const fs::path& manifest) {
  const fs::path parent = manifest.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void reject_overwrite_of_input(const fs::path& input, const fs::path& output) {
  std::error_code ec;
  if (fs::exists(output, ec) && fs::equivalent(input, output, ec))
    throw DomainError("output " + output.string() + " would overwrite the input");
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

// ---- gen-data ------------------------------------------------------------------

struct GenData {
  Settings settings;
  std::string out;
  std::size_t count = 10;
  std::vector<std::string> classes;
  std::uint64_t seed = 0;
  std::size_t size = 256;
  double ppm = 10.0;
  double altitude = 10.0;
  double min_range = 10.0;
  double max_range = 20.0;
  std::string noise = "none";
  double nadir = 0.0;
  double colormap = 0.0;
  std::string manifest_name = "manifest.json";

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--out", "out", out, "Output directory")->required();
    settings.add(app, "--count", "count", count, "Scenes per class");
    settings.add(app, "--classes", "classes", classes, "Subset of classes (default: all five)");
    settings.add(app, "--seed", "seed", seed, "Global seed");
    settings.add(app, "--size", "size", size, "Image height and width in pixels");
    settings.add(app, "--ppm", "pixelsPerMeter", ppm, "Pixels per meter");
    settings.add(app, "--altitude", "altitude", altitude, "Sonar altitude in meters");
    settings.add(app, "--min-range", "minRange", min_range, "Minimum ground range in meters");
    settings.add(app, "--max-range", "maxRange", max_range, "Maximum ground range in meters");
    settings.add(app, "--noise,--noise-profile", "noise", noise, "Noise profile: none, light, default, heavy");
    settings.add(app, "--nadir-prob", "nadirProbability", nadir, "Probability of a nadir stripe");
    settings.add(app, "--colormap-prob", "colormapProbability", colormap, "Probability of copper colormapping");
    settings.add(app, "--manifest-name", "manifestName", manifest_name, "Manifest file name");
  }

  int run() {
    settings.apply_config("gen-data");
    scene::DatasetOptions opt;
    opt.count_per_class = count;
    if (!classes.empty()) {
      opt.classes.clear();
      for (const auto& c : classes) opt.classes.push_back(scene::parse_class(c));
    }
    opt.noise = noise::named_profile(noise);
    opt.output_dir = out;
    opt.seed = seed;
    opt.image_size = size;
    opt.pixels_per_meter = ppm;
    opt.sonar_altitude_m = altitude;
    opt.min_ground_range_m = min_range;
    opt.max_ground_range_m = max_range;
    opt.nadir_probability = nadir;
    opt.colormap_probability = colormap;
    opt.manifest_name = manifest_name;
    const scene::GenerationResult result = scene::generate_dataset(opt);
    for (const auto& f : result.failures) warn(f.id + ": " + f.message);
    write_provenance(fs::path(out) / "gen-data.provenance.json", "gen-data", seed, settings.effective(),
                     {manifest_name});
    std::cout << "generated " << result.manifest.entries.size() << " scenes into " << out << '\n';
    return result.failures.empty() ? kExitOk : kExitIoError;
  }
};

// ---- add-noise -------------------------------------------------------------------

struct AddNoise {
  Settings settings;
  std::string in, out, manifest, out_manifest, noisy_dir;
  std::string profile = "default";
  std::string multipath, reverb;
  double looks = 0.0;
  std::uint64_t seed = 0;

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--in", "in", in, "Single input image");
    settings.add(app, "--out", "out", out, "Single output image");
    settings.add(app, "--manifest", "manifest", manifest, "Dataset manifest to corrupt");
    settings.add(app, "--out-manifest", "outManifest", out_manifest,
                 "Manifest to write (default: manifest.noisy.json beside the input)");
    settings.add(app, "--noisy-dir", "noisyDir", noisy_dir, "Subdirectory for noisy images (default: noisy-<profile>)");
    settings.add(app, "--profile", "profile", profile, "Named profile: none, light, default, heavy");
    settings.add(app, "--multipath", "multipath", multipath, "Override multipath as delay:attenuation,... ('off' disables)");
    settings.add(app, "--reverb", "reverb", reverb, "Override reverberation as decay,length,mix ('off' disables)");
    settings.add(app, "--looks,--backscatter-looks", "looks", looks, "Override backscatter looks (> 0)");
    settings.add(app, "--seed", "seed", seed, "Global seed");
  }

  noise::NoiseProfile build_profile() const {
    noise::NoiseProfile p = noise::named_profile(profile);
    bool custom = false;
    if (!multipath.empty()) {
      custom = true;
      if (multipath == "off") p.multipath.reset();
      else p.multipath = noise::parse_multipath(multipath);
    }
    if (!reverb.empty()) {
      custom = true;
      if (reverb == "off") p.reverb.reset();
      else p.reverb = noise::parse_reverb(reverb);
    }
    if (looks != 0.0) {
      custom = true;
      noise::BackscatterParams b{looks};
      noise::validate(b);
      p.backscatter = b;
    }
    if (custom) p.name = "custom";
    return p;
  }

  int run() {
    settings.apply_config("add-noise");
    const noise::NoiseProfile p = build_profile();
    if (manifest.empty()) {
      if (in.empty() || out.empty()) throw DomainError("add-noise: give --in and --out, or --manifest");
      reject_overwrite_of_input(in, out);
      const Raster img = io::read_image(in);
      io::write_image(out, noise::apply_profile(img, p, seed));
      write_provenance(provenance_for_file(out), "add-noise", seed, settings.effective(), {out});
      return kExitOk;
    }
    scene::DatasetManifest m = scene::load_manifest(manifest);
    const fs::path dir = manifest_dir(manifest);
    const fs::path target = out_manifest.empty() ? dir / "manifest.noisy.json" : fs::path(out_manifest);
    reject_overwrite_of_input(manifest, target);
    const std::string sub = noisy_dir.empty() ? "noisy-" + p.name : noisy_dir;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      auto& e = m.entries[i];
      const Raster clean = io::read_image(m.resolve(e.image));
      e.noise = p;
      e.noise_seed = scene::derive_seed(seed, kNoiseStream, i);
      e.noisy_image = sub + "/" + e.id + ".png";
      io::write_image(m.resolve(e.noisy_image), noise::apply_profile(clean, p, e.noise_seed));
    }
    // Entry paths stay relative to the input manifest's directory.
    const fs::path target_dir = manifest_dir(target);
    std::error_code ec;
    if (!fs::equivalent(target_dir, dir, ec)) {
      const fs::path rel = fs::relative(dir, target_dir);
      for (auto& e : m.entries) {
        for (std::string* s : {&e.image, &e.noisy_image, &e.highlight_mask, &e.shadow_mask, &e.predicted_shadow_mask})
          if (!s->empty()) *s = (rel / *s).lexically_normal().generic_string();
      }
    }
    scene::save_manifest(m, target);
    write_provenance(provenance_for_file(target), "add-noise", seed, settings.effective(), {target.string()});
    std::cout << "corrupted " << m.entries.size() << " images with profile '" << p.name << "'\n";
    return kExitOk;
  }
};

// ---- segment ------------------------------------------------------------------------

struct Segment {
  Settings settings;
  std::vector<std::string> in;
  std::string out, out_dir, manifest, out_manifest;
  bool overlay = false;
  int kernel = 5, k = 2, disk = 3;
  std::uint64_t seed = 0;
  std::string polarity = "high";

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--in", "in", in, "Input image(s)");
    settings.add(app, "--out", "out", out, "Output mask for a single input");
    settings.add(app, "--out-dir", "outDir", out_dir, "Output directory for several inputs");
    settings.add(app, "--manifest", "manifest", manifest, "Segment every entry of a manifest");
    settings.add(app, "--out-manifest", "outManifest", out_manifest,
                 "Manifest to write (default: manifest.segmented.json beside the input)");
    settings.add_flag(app, "--overlay", "overlay", overlay, "Also write an overlay PNG");
    settings.add(app, "--kernel", "kernel", kernel, "Odd smoothing kernel size n");
    settings.add(app, "--k", "k", k, "Cluster parameter (k + 1 clusters)");
    settings.add(app, "--disk", "disk", disk, "Closing disk radius");
    settings.add(app, "--seed", "seed", seed, "Clustering seed");
    settings.add(app, "--polarity", "polarity", polarity, "Shadow cluster: high or low spectral ratio");
  }

  segmentation::SegmentationConfig config() const {
    segmentation::SegmentationConfig cfg;
    cfg.kernel_size = kernel;
    cfg.k = k;
    cfg.disk_radius = disk;
    cfg.seed = seed;
    cfg.polarity = segmentation::parse_polarity(polarity);
    cfg.validate();
    return cfg;
  }

  static fs::path overlay_path(const fs::path& mask_path) {
    fs::path p = mask_path;
    p.replace_filename(mask_path.stem().string() + "_overlay.png");
    return p;
  }

  void segment_file(const fs::path& input, const fs::path& output, const segmentation::SegmentationConfig& cfg,
                    std::vector<std::string>& outputs) const {
    reject_overwrite_of_input(input, output);
    const Raster img = io::read_image(input);
    const ShadowMask mask = segmentation::segment_shadows(img, cfg);
    io::write_mask(output, mask);
    outputs.push_back(output.string());
    if (overlay) {
      io::write_image(overlay_path(output), segmentation::overlay(img, mask));
      outputs.push_back(overlay_path(output).string());
    }
  }

  int run() {
    settings.apply_config("segment");
    const segmentation::SegmentationConfig cfg = config();
    std::vector<std::string> outputs;
    if (!manifest.empty()) {
      scene::DatasetManifest m = scene::load_manifest(manifest);
      const fs::path dir = manifest_dir(manifest);
      const fs::path target = out_manifest.empty() ? dir / "manifest.segmented.json" : fs::path(out_manifest);
      reject_overwrite_of_input(manifest, target);
      std::error_code ec;
      if (!fs::equivalent(manifest_dir(target), dir, ec) && fs::exists(manifest_dir(target)))
        throw DomainError("segment: the output manifest must live beside the input manifest");
      for (auto& e : m.entries) {
        e.predicted_shadow_mask = "masks-pred/" + e.id + ".png";
        segment_file(m.input_image(e), m.resolve(e.predicted_shadow_mask), cfg, outputs);
      }
      scene::save_manifest(m, target);
      write_provenance(provenance_for_file(target), "segment", seed, settings.effective(), {target.string()});
      std::cout << "segmented " << m.entries.size() << " images\n";
      return kExitOk;
    }
    if (in.empty()) throw DomainError("segment: give --in or --manifest");
    if (in.size() == 1 && !out.empty()) {
      segment_file(in.front(), out, cfg, outputs);
      write_provenance(provenance_for_file(out), "segment", seed, settings.effective(), outputs);
      return kExitOk;
    }
    if (out_dir.empty()) throw DomainError("segment: several inputs need --out-dir");
    for (const auto& path : in)
      segment_file(path, fs::path(out_dir) / (fs::path(path).stem().string() + "_mask.png"), cfg, outputs);
    write_provenance(fs::path(out_dir) / "segment.provenance.json", "segment", seed, settings.effective(), outputs);
    return kExitOk;
  }
};

// ---- train-fusion / eval-fusion ---------------------------------------------------------

std::optional<denoise::DenoiseModel> maybe_denoiser(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return denoise::load_model(path);
}

struct TrainFusion {
  Settings settings;
  std::string manifest, out, history, mask_source = "ground-truth", mode = "adaptive", denoiser;
  int epochs = 60;
  std::size_t batch = 32;
  double lr = 0.001;
  double lambda = -0.01;
  double val_fraction = 0.1;
  std::size_t hidden = 32, attention = 16;
  std::uint64_t seed = 0;

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--manifest", "manifest", manifest, "Training manifest")->required();
    settings.add(app, "--out", "out", out, "Checkpoint path")->required();
    settings.add(app, "--history", "history", history, "Training history JSON (default: <out>.history.json)");
    settings.add(app, "--mask-source", "maskSource", mask_source, "ground-truth, predicted or segment");
    settings.add(app, "--mode", "mode", mode, "adaptive, combined or shadow");
    settings.add(app, "--denoiser,--denoise", "denoiser", denoiser, "Optional denoiser checkpoint applied to inputs first");
    settings.add(app, "--epochs", "epochs", epochs, "Training epochs");
    settings.add(app, "--batch", "batchSize", batch, "Mini-batch size");
    settings.add(app, "--lr", "learningRate", lr, "Adam learning rate");
    settings.add(app, "--lambda", "lambda", lambda, "Attention-entropy weight");
    settings.add(app, "--val-fraction", "validationFraction", val_fraction, "Validation split fraction");
    settings.add(app, "--hidden", "hidden", hidden, "Stream MLP hidden width");
    settings.add(app, "--attention-dim", "attentionDim", attention, "Attention vector length");
    settings.add(app, "--seed", "seed", seed, "Training seed");
  }

  int run() {
    settings.apply_config("train-fusion");
    fusion::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.learning_rate = lr;
    cfg.lambda = lambda;
    cfg.seed = seed;
    cfg.validation_fraction = val_fraction;
    cfg.mode = fusion::parse_alpha_mode(mode);
    cfg.hidden = hidden;
    cfg.attention_dim = attention;
    cfg.validate();
    const fusion::MaskSource source = fusion::parse_mask_source(mask_source);
    const auto den = maybe_denoiser(denoiser);
    const scene::DatasetManifest m = scene::load_manifest(manifest);
    const fusion::FeaturizeResult features =
        fusion::featurize_manifest(m, source, {}, den ? &*den : nullptr, seed);
    for (const auto& w : features.warnings) warn(w);
    const fusion::TrainResult result = fusion::train_fusion(features.data, features.class_names, cfg);
    const json history_json = fusion::to_json(result.history);
    fusion::save_model(result.model, out,
                       {{"trainConfig", fusion::to_json(cfg)},
                        {"maskSource", mask_source},
                        {"selectedEpoch", result.selected_epoch},
                        {"samples", features.data.size()}});
    const fs::path history_path = history.empty() ? fs::path(out + ".history.json") : fs::path(history);
    write_json(history_path, {{"selectedEpoch", result.selected_epoch}, {"epochs", history_json}});
    write_provenance(provenance_for_file(out), "train-fusion", seed, settings.effective(),
                     {out, history_path.string()});
    const auto& best = result.history[static_cast<std::size_t>(result.selected_epoch - 1)];
    std::cout << "trained on " << features.data.size() << " samples; selected epoch " << result.selected_epoch
              << " (validation accuracy " << best.validation_accuracy << ")\n";
    return kExitOk;
  }
};

struct EvalFusion {
  Settings settings;
  std::string manifest, model, out, csv, mask_source = "ground-truth", denoiser;
  std::uint64_t seed = 0;

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--manifest", "manifest", manifest, "Evaluation manifest")->required();
    settings.add(app, "--model", "model", model, "Fusion checkpoint")->required();
    settings.add(app, "--out", "out", out, "Report JSON path")->required();
    settings.add(app, "--csv", "csv", csv, "Optional per-image CSV path");
    settings.add(app, "--mask-source", "maskSource", mask_source, "ground-truth, predicted or segment");
    settings.add(app, "--denoiser,--denoise", "denoiser", denoiser, "Optional denoiser checkpoint applied to inputs first");
    settings.add(app, "--seed", "seed", seed, "Seed for on-the-fly segmentation");
  }

  int run() {
    settings.apply_config("eval-fusion");
    const fusion::MaskSource source = fusion::parse_mask_source(mask_source);
    const fusion::FusionModel fm = fusion::load_model(model);
    const auto den = maybe_denoiser(denoiser);
    const scene::DatasetManifest m = scene::load_manifest(manifest);
    const fusion::FeaturizeResult features =
        fusion::featurize_manifest(m, source, fm.class_names, den ? &*den : nullptr, seed);
    for (const auto& w : features.warnings) warn(w);
    const fusion::EvalReport report = fusion::evaluate(fm, features.data);
    json j = report.to_json();
    j["mode"] = fusion::to_string(fm.mode);
    j["maskSource"] = mask_source;
    write_json(out, j);
    std::vector<std::string> outputs{out};
    if (!csv.empty()) {
      io::write_text_atomic(csv, report.to_csv());
      outputs.push_back(csv);
    }
    write_provenance(provenance_for_file(out), "eval-fusion", seed, settings.effective(), outputs);
    std::cout << "accuracy " << report.accuracy << " on " << report.images.size() << " images\n";
    return kExitOk;
  }
};

// ---- train-denoise / denoise -----------------------------------------------------------

struct TrainDenoise {
  Settings settings;
  std::string manifest, out;
  std::vector<std::string> noisy, clean, mask;
  std::size_t limit = 0;
  int region_blur = 7;
  std::size_t patch = 9, stride = 4, batch = 64, per_image = 64;
  int epochs = 30;
  double lr = 0.001, lambda1 = 1.0, lambda2 = 1.0, lambda3 = 0.0;
  std::string polarity = "complement";
  std::uint64_t seed = 0;

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--manifest", "manifest", manifest, "Manifest with noisy images");
    settings.add(app, "--noisy", "noisy", noisy, "Explicit noisy image(s)");
    settings.add(app, "--clean", "clean", clean, "Explicit clean image(s), paired with --noisy");
    settings.add(app, "--mask", "mask", mask, "Region mask PNG(s), paired with --noisy");
    settings.add(app, "--limit", "limit", limit, "Use at most this many manifest entries (0 = all)");
    settings.add(app, "--region-blur", "regionBlur", region_blur, "Box blur for ground-truth region masks");
    settings.add(app, "--out", "out", out, "Checkpoint path")->required();
    settings.add(app, "--patch", "patchSize", patch, "Odd patch size");
    settings.add(app, "--stride", "stride", stride, "Inference patch stride");
    settings.add(app, "--epochs", "epochs", epochs, "Training epochs");
    settings.add(app, "--batch", "batchSize", batch, "Mini-batch size");
    settings.add(app, "--patches-per-image", "patchesPerImage", per_image, "Random patches per image");
    settings.add(app, "--lr", "learningRate", lr, "Adam learning rate");
    settings.add(app, "--lambda1", "lambda1", lambda1, "Weight of the plain squared error");
    settings.add(app, "--lambda2", "lambda2", lambda2, "Weight of the mask-weighted squared error");
    settings.add(app, "--lambda3", "lambda3", lambda3, "Weight of the gradient-map term");
    settings.add(app, "--mask-polarity", "maskPolarity", polarity, "complement (1 - M) or direct (M)");
    settings.add(app, "--seed", "seed", seed, "Training seed");
  }

  std::vector<denoise::DenoisePair> load_pairs() const {
    std::vector<denoise::DenoisePair> pairs;
    if (!manifest.empty()) {
      const scene::DatasetManifest m = scene::load_manifest(manifest);
      for (const auto& e : m.entries) {
        if (limit != 0 && pairs.size() >= limit) break;
        if (e.noisy_image.empty()) continue;
        pairs.push_back({io::read_image(m.resolve(e.noisy_image)), io::read_image(m.resolve(e.image)),
                         scene::region_mask_from_scene(io::read_mask(m.resolve(e.highlight_mask)),
                                                       io::read_mask(m.resolve(e.shadow_mask)), region_blur)});
      }
      if (pairs.empty()) throw DomainError("train-denoise: the manifest has no noisy images");
      return pairs;
    }
    if (noisy.empty() || noisy.size() != clean.size())
      throw DomainError("train-denoise: give --manifest or matching --noisy/--clean lists");
    if (!mask.empty() && mask.size() != noisy.size())
      throw DomainError("train-denoise: --mask count must match --noisy");
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      Raster n = io::read_image(noisy[i]);
      Raster c = io::read_image(clean[i]);
      RegionMask r = mask.empty() ? RegionMask(n.height(), n.width(), 0.0) : io::read_region_mask(mask[i]);
      pairs.push_back({std::move(n), std::move(c), std::move(r)});
    }
    return pairs;
  }

  int run() {
    settings.apply_config("train-denoise");
    denoise::DenoiseConfig cfg;
    cfg.patch_size = patch;
    cfg.stride = stride;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.patches_per_image = per_image;
    cfg.learning_rate = lr;
    cfg.weights = {lambda1, lambda2, lambda3};
    cfg.polarity = denoise::parse_mask_polarity(polarity);
    cfg.seed = seed;
    cfg.validate();
    const auto pairs = load_pairs();
    const denoise::DenoiseTrainResult result = denoise::train_patch_denoiser(pairs, cfg);
    denoise::save_model(result.model, out,
                        {{"trainConfig", denoise::to_json(cfg)}, {"lossHistory", result.loss_history},
                         {"pairs", pairs.size()}});
    write_provenance(provenance_for_file(out), "train-denoise", seed, settings.effective(), {out});
    std::cout << "trained denoiser on " << pairs.size() << " images; final loss " << result.loss_history.back()
              << '\n';
    return kExitOk;
  }
};

struct Denoise {
  Settings settings;
  std::string in, out, model, method = "model", mask, clean, report;
  int strong = 7, weak = 3;

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--in", "in", in, "Noisy input image")->required();
    settings.add(app, "--out", "out", out, "Denoised output image")->required();
    settings.add(app, "--method", "method", method, "model or baseline");
    settings.add(app, "--model", "model", model, "Denoiser checkpoint (method=model)");
    settings.add(app, "--mask", "mask", mask, "Region mask PNG (method=baseline; default: all zeros)");
    settings.add(app, "--strong", "strongKernel", strong, "Strong smoothing kernel (baseline)");
    settings.add(app, "--weak", "weakKernel", weak, "Weak smoothing kernel (baseline)");
    settings.add(app, "--clean", "clean", clean, "Clean reference; enables the quality report");
    settings.add(app, "--report", "report", report, "Quality report JSON (default: <out>.metrics.json)");
  }

  int run() {
    settings.apply_config("denoise");
    reject_overwrite_of_input(in, out);
    const Raster noisy = io::read_image(in);
    Raster result;
    if (method == "model") {
      if (model.empty()) throw DomainError("denoise: --model is required for method 'model'");
      result = denoise::denoise_image(denoise::load_model(model), noisy);
    } else if (method == "baseline") {
      const RegionMask m = mask.empty() ? RegionMask(noisy.height(), noisy.width(), 0.0) : io::read_region_mask(mask);
      result = denoise::baseline_region_filter(noisy, m, strong, weak);
    } else {
      throw DomainError("denoise: unknown method '" + method + "'");
    }
    io::write_image(out, result);
    std::vector<std::string> outputs{out};
    if (!clean.empty()) {
      const Raster ref = io::read_image(clean);
      const std::string id = fs::path(in).stem().string();
      json arr = json::array();
      for (const auto& [name, img] : {std::pair<std::string, const Raster*>{"noisy", &noisy}, {method, &result}}) {
        metrics::QualityReport q{name, id, metrics::psnr(*img, ref), metrics::ssim(to_gray(*img), to_gray(ref)),
                                 std::nullopt};
        arr.push_back(metrics::to_json(q));
      }
      const std::string report_path = report.empty() ? out + ".metrics.json" : report;
      write_json(report_path, arr);
      outputs.push_back(report_path);
    }
    write_provenance(provenance_for_file(out), "denoise", 0, settings.effective(), outputs);
    return kExitOk;
  }
};

// ---- metrics ------------------------------------------------------------------------

struct Metrics {
  Settings settings;
  std::string ref, ref_mask, out, csv, method_id = "input";
  std::vector<std::string> test, test_mask;

  void setup(CLI::App* app) {
    settings.add_config_option(app);
    settings.add(app, "--ref", "ref", ref, "Reference image")->required();
    settings.add(app, "--test", "test", test, "Image(s) to score against the reference")->required();
    settings.add(app, "--ref-mask", "refMask", ref_mask, "Reference mask for IoU");
    settings.add(app, "--test-mask", "testMask", test_mask, "Mask(s) paired with --test for IoU");
    settings.add(app, "--method-id", "methodId", method_id, "Method identifier recorded in the report");
    settings.add(app, "--out", "out", out, "Report JSON path (default: stdout)");
    settings.add(app, "--csv", "csv", csv, "Optional CSV table path");
  }

  int run() {
    settings.apply_config("metrics");
    if (!test_mask.empty() && (ref_mask.empty() || test_mask.size() != test.size()))
      throw DomainError("metrics: --test-mask needs --ref-mask and one mask per --test image");
    const Raster reference = io::read_image(ref);
    const std::optional<BinaryMask> reference_mask =
        ref_mask.empty() ? std::nullopt : std::optional<BinaryMask>(io::read_mask(ref_mask));
    json arr = json::array();
    std::ostringstream table;
    table.precision(17);
    table << "methodId,imageId,psnr,ssim,iou\n";
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Raster img = io::read_image(test[i]);
      metrics::QualityReport q{method_id, fs::path(test[i]).stem().string(), metrics::psnr(img, reference),
                               metrics::ssim(to_gray(img), to_gray(reference)), std::nullopt};
      if (!test_mask.empty()) q.iou = metrics::iou(io::read_mask(test_mask[i]), *reference_mask);
      arr.push_back(metrics::to_json(q));
      table << q.method_id << ',' << q.image_id << ',';
      if (std::isinf(q.psnr)) table << "inf";
      else table << q.psnr;
      table << ',' << q.ssim << ',';
      if (q.iou) table << *q.iou;
      table << '\n';
    }
    std::vector<std::string> outputs;
    if (out.empty()) {
      std::cout << arr.dump(2) << '\n';
    } else {
      write_json(out, arr);
      outputs.push_back(out);
    }
    if (!csv.empty()) {
      io::write_text_atomic(csv, table.str());
      outputs.push_back(csv);
    }
    if (!out.empty()) write_provenance(provenance_for_file(out), "metrics", 0, settings.effective(), outputs);
    return kExitOk;
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Synthetic side-scan sonar pipeline: scenes, noise, shadows, fusion, denoising", "sonarfuse"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenData gen;
  AddNoise add_noise;
  Segment seg;
  TrainFusion train_fusion;
  EvalFusion eval_fusion;
  TrainDenoise train_denoise;
  Denoise den;
  Metrics met;

  struct Command {
    CLI::App* app;
    std::function<int()> run;
  };
  std::vector<Command> commands;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.setup(sub);
    commands.push_back({sub, [&cmd] { return cmd.run(); }});
  };
  add("gen-data", "Generate a synthetic scene dataset with masks and a manifest", gen);
  add("add-noise", "Apply multipath, reverberation and backscatter noise", add_noise);
  add("segment", "Segment acoustic shadows", seg);
  add("train-fusion", "Train the two-stream attention fusion classifier", train_fusion);
  add("eval-fusion", "Evaluate a fusion classifier checkpoint", eval_fusion);
  add("train-denoise", "Train the region-aware patch denoiser", train_denoise);
  add("denoise", "Denoise an image with the trained model or the region baseline", den);
  add("metrics", "Compute PSNR, SSIM and IoU", met);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitDomainError;
  }

  try {
    for (const auto& c : commands)
      if (c.app->parsed()) return c.run();
    std::cerr << app.help();
    return kExitDomainError;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data());
}

}  // namespace sonarfuse::cli

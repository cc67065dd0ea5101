#include "sonarfuse/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "sonarfuse/error.hpp"
#include "sonarfuse/image_io.hpp"
#include "sonarfuse/imaging.hpp"

namespace sonarfuse::scene {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::array<unsigned char, 3>, 256> kPalette{{
#include "colormap_table.inc"
}};

constexpr double kSeabedLevel = 0.45;
constexpr double kSeabedAmplitude = 0.06;
constexpr double kShadowLevel = 0.08;
constexpr double kNadirLevel = 0.04;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Smooth value noise in [-1,1]: bilinear interpolation of a seeded coarse lattice, two octaves.
Plane smooth_noise(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  Plane out(h, w);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double amplitude = 1.0;
  double total = 0.0;
  for (std::size_t cells : {6u, 14u}) {
    const std::size_t n = cells + 1;
    std::vector<double> lattice(n * n);
    for (double& v : lattice) v = u(rng);
    for (std::size_t y = 0; y < h; ++y) {
      const double fy = static_cast<double>(y) / std::max<std::size_t>(h - 1, 1) * cells;
      const std::size_t y0 = std::min(static_cast<std::size_t>(fy), cells - 1);
      const double ty = fy - y0;
      for (std::size_t x = 0; x < w; ++x) {
        const double fx = static_cast<double>(x) / std::max<std::size_t>(w - 1, 1) * cells;
        const std::size_t x0 = std::min(static_cast<std::size_t>(fx), cells - 1);
        const double tx = fx - x0;
        const double top = lattice[y0 * n + x0] * (1 - tx) + lattice[y0 * n + x0 + 1] * tx;
        const double bottom = lattice[(y0 + 1) * n + x0] * (1 - tx) + lattice[(y0 + 1) * n + x0 + 1] * tx;
        out.at(y, x) += amplitude * (top * (1 - ty) + bottom * ty);
      }
    }
    total += amplitude;
    amplitude *= 0.5;
  }
  for (double& v : out.data()) v /= total;
  return out;
}

// Footprint membership and highlight brightness in object-local meters.
// u runs along the object's long axis, v across it.
struct Footprint {
  double extent_m;  // radius enclosing the footprint
  // Returns brightness in (0,1] for covered points, 0 otherwise.
  double (*shade)(double u, double v, double scale);
};

double ship_shade(double u, double v, double s) {
  const double half_len = 5.0 * s;
  const double half_beam = 1.5 * s;
  if (std::abs(u) > half_len) return 0.0;
  // Blunt stern, tapering bow over the forward quarter.
  double half_width = half_beam;
  if (u > 0.5 * half_len) half_width = half_beam * (half_len - u) / (0.5 * half_len);
  if (std::abs(v) > half_width) return 0.0;
  const bool superstructure = u > -0.4 * half_len && u < 0.2 * half_len && std::abs(v) < 0.5 * half_beam;
  return superstructure ? 0.97 : 0.88;
}

double plane_shade(double u, double v, double s) {
  const bool fuselage = std::abs(u) <= 4.5 * s && std::abs(v) <= 0.6 * s;
  const bool wings = std::abs(u - 0.5 * s) <= 0.8 * s && std::abs(v) <= 5.5 * s;
  const bool tail = u >= -4.5 * s && u <= -3.6 * s && std::abs(v) <= 1.8 * s;
  if (fuselage) return 0.95;
  if (wings || tail) return 0.85;
  return 0.0;
}

double cylinder_shade(double u, double v, double s) {
  if (std::abs(u) > 1.0 * s || std::abs(v) > 0.3 * s) return 0.0;
  return 0.9;
}

double sphere_shade(double u, double v, double s) {
  const double r = 0.5 * s;
  const double d2 = u * u + v * v;
  if (d2 > r * r) return 0.0;
  return 0.8 + 0.15 * (1.0 - d2 / (r * r));
}

double cone_shade(double u, double v, double s) {
  const double base = 0.8 * s;
  const double top = 0.45 * s;
  const double d2 = u * u + v * v;
  if (d2 > base * base) return 0.0;
  return d2 <= top * top ? 0.95 : 0.78;
}

Footprint footprint(ObjectClass c, double scale) {
  switch (c) {
    case ObjectClass::Ship: return {5.3 * scale, ship_shade};
    case ObjectClass::Plane: return {7.2 * scale, plane_shade};
    case ObjectClass::MineCylinder: return {1.1 * scale, cylinder_shade};
    case ObjectClass::MineSphere: return {0.55 * scale, sphere_shade};
    case ObjectClass::MineTruncatedCone: return {0.85 * scale, cone_shade};
  }
  throw DomainError("unknown object class");
}

struct LocalFootprint {
  long size = 0;  // square canvas, object center at (size/2, size/2)
  std::vector<double> shade;
  long top = 0, bottom = -1, left = 0, right = -1;  // bounding box of covered pixels
};

LocalFootprint rasterize(const SceneSpec& spec) {
  const Footprint fp = footprint(spec.label, spec.object_scale);
  const double ppm = spec.pixels_per_meter;
  const long half = static_cast<long>(std::ceil(fp.extent_m * ppm)) + 2;
  LocalFootprint local;
  local.size = 2 * half + 1;
  local.shade.assign(static_cast<std::size_t>(local.size * local.size), 0.0);
  const double theta = spec.orientation_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  local.top = local.size;
  local.left = local.size;
  for (long y = 0; y < local.size; ++y) {
    for (long x = 0; x < local.size; ++x) {
      const double dx = (static_cast<double>(x - half)) / ppm;
      const double dy = (static_cast<double>(y - half)) / ppm;
      const double u = ct * dx + st * dy;
      const double v = -st * dx + ct * dy;
      const double s = fp.shade(u, v, spec.object_scale);
      if (s <= 0.0) continue;
      local.shade[static_cast<std::size_t>(y * local.size + x)] = s;
      local.top = std::min(local.top, y);
      local.bottom = std::max(local.bottom, y);
      local.left = std::min(local.left, x);
      local.right = std::max(local.right, x);
    }
  }
  return local;
}

}  // namespace

std::string to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::Ship: return "ship";
    case ObjectClass::Plane: return "plane";
    case ObjectClass::MineCylinder: return "mine-cylinder";
    case ObjectClass::MineSphere: return "mine-sphere";
    case ObjectClass::MineTruncatedCone: return "mine-truncated-cone";
  }
  return "unknown";
}

ObjectClass parse_class(const std::string& name) {
  for (ObjectClass c : kAllClasses)
    if (to_string(c) == name) return c;
  throw DomainError("unknown object class '" + name + "'");
}

double nominal_height(ObjectClass c) {
  switch (c) {
    case ObjectClass::Ship: return 2.5;
    case ObjectClass::Plane: return 1.2;
    case ObjectClass::MineCylinder: return 0.6;
    case ObjectClass::MineSphere: return 1.0;
    case ObjectClass::MineTruncatedCone: return 0.5;
  }
  return 1.0;
}

void SceneSpec::validate() const {
  require(object_height_m > 0.0 && object_height_m < sonar_altitude_m,
          "scene: object height must lie in (0, sonar altitude)");
  require(ground_range_m > 0.0, "scene: ground range must be > 0");
  require(pixels_per_meter > 0.0, "scene: pixels per meter must be > 0");
  require(object_scale > 0.0, "scene: object scale must be > 0");
  require(nadir_width_px >= 0, "scene: nadir width must be >= 0");
  require(image_height >= 8 && image_width >= 8, "scene: image must be at least 8x8");
  require(std::isfinite(orientation_deg), "scene: orientation must be finite");
}

double shadow_length_m(const SceneSpec& spec) {
  return spec.object_height_m * spec.ground_range_m / (spec.sonar_altitude_m - spec.object_height_m);
}

int shadow_length_px(const SceneSpec& spec) {
  return static_cast<int>(std::lround(shadow_length_m(spec) * spec.pixels_per_meter));
}

Raster apply_colormap(const Plane& gray) {
  Raster out(gray.height(), gray.width(), 3);
  for (std::size_t y = 0; y < gray.height(); ++y)
    for (std::size_t x = 0; x < gray.width(); ++x) {
      const auto& rgb = kPalette[io::to_byte(gray.at(y, x))];
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = rgb[c] / 255.0;
    }
  return out;
}

SceneRecord render_scene(const SceneSpec& spec) {
  spec.validate();
  const std::size_t h = spec.image_height;
  const std::size_t w = spec.image_width;
  std::mt19937_64 rng(spec.seed);

  Plane seabed = smooth_noise(h, w, rng);
  Plane gray(h, w);
  for (std::size_t i = 0; i < gray.size(); ++i) gray.data()[i] = kSeabedLevel + kSeabedAmplitude * seabed.data()[i];

  const LocalFootprint local = rasterize(spec);
  const long shadow_px = shadow_length_px(spec);
  const long obj_h = local.bottom - local.top + 1;
  const long obj_w = local.right - local.left + 1;
  const long margin = 2;
  const long nadir = spec.nadir_width_px;

  // Place the object so that footprint and full shadow stay inside and clear of the nadir stripe.
  const long min_top = nadir + margin;
  long max_top = static_cast<long>(h) - margin - obj_h - shadow_px;
  long min_left = margin;
  long max_left = static_cast<long>(w) - margin - obj_w;
  if (max_top < min_top) max_top = min_top;
  if (max_left < min_left) max_left = min_left;
  const long top = std::uniform_int_distribution<long>(min_top, max_top)(rng);
  const long left = std::uniform_int_distribution<long>(min_left, max_left)(rng);
  const long off_y = top - local.top;
  const long off_x = left - local.left;

  SceneRecord record;
  record.spec = spec;
  record.label = spec.label;
  record.highlight_mask = BinaryMask(h, w);
  record.shadow_mask = BinaryMask(h, w);

  std::vector<long> far_edge(w, -1);
  for (long y = local.top; y <= local.bottom; ++y) {
    for (long x = local.left; x <= local.right; ++x) {
      const double s = local.shade[static_cast<std::size_t>(y * local.size + x)];
      if (s <= 0.0) continue;
      const long iy = y + off_y, ix = x + off_x;
      if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
      gray.at(iy, ix) = s;
      record.highlight_mask.set(iy, ix, true);
      far_edge[ix] = std::max(far_edge[ix], iy);
    }
  }

  Plane shadow_texture = smooth_noise(h, w, rng);
  for (std::size_t x = 0; x < w; ++x) {
    if (far_edge[x] < 0) continue;
    for (long d = 1; d <= shadow_px; ++d) {
      const long y = far_edge[x] + d;
      if (y >= static_cast<long>(h)) break;
      gray.at(y, x) = kShadowLevel + 0.02 * shadow_texture.at(y, x);
      record.shadow_mask.set(y, x, true);
    }
  }

  for (long y = 0; y < std::min<long>(nadir, static_cast<long>(h)); ++y)
    for (std::size_t x = 0; x < w; ++x) gray.at(y, x) = kNadirLevel + 0.02 * shadow_texture.at(y, x);

  for (double& v : gray.data()) v = std::clamp(v, 0.0, 1.0);
  record.image = spec.colormapped ? apply_colormap(gray) : plane_to_raster(gray);
  return record;
}

RegionMask region_mask_from_scene(const BinaryMask& highlight, const BinaryMask& shadow, int blur) {
  require(highlight.same_shape(shadow), "region_mask_from_scene: mask shapes differ");
  Plane united(highlight.height(), highlight.width());
  for (std::size_t i = 0; i < united.size(); ++i)
    united.data()[i] = (highlight.bits()[i] || shadow.bits()[i]) ? 1.0 : 0.0;
  Plane soft = imaging::convolve_uniform(united, blur);
  for (double& v : soft.data()) v = std::clamp(v, 0.0, 1.0);
  return soft;
}

// ---- JSON ------------------------------------------------------------------

nlohmann::json to_json(const SceneSpec& spec) {
  return {{"classLabel", to_string(spec.label)},
          {"objectHeight", spec.object_height_m},
          {"sonarAltitude", spec.sonar_altitude_m},
          {"groundRange", spec.ground_range_m},
          {"pixelsPerMeter", spec.pixels_per_meter},
          {"orientation", spec.orientation_deg},
          {"objectScale", spec.object_scale},
          {"nadirWidth", spec.nadir_width_px},
          {"colormapped", spec.colormapped},
          {"imageHeight", spec.image_height},
          {"imageWidth", spec.image_width},
          {"seed", spec.seed}};
}

SceneSpec spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  spec.label = parse_class(j.at("classLabel").get<std::string>());
  spec.object_height_m = j.at("objectHeight").get<double>();
  spec.sonar_altitude_m = j.at("sonarAltitude").get<double>();
  spec.ground_range_m = j.at("groundRange").get<double>();
  spec.pixels_per_meter = j.at("pixelsPerMeter").get<double>();
  spec.orientation_deg = j.at("orientation").get<double>();
  spec.object_scale = j.value("objectScale", 1.0);
  spec.nadir_width_px = j.value("nadirWidth", 0);
  spec.colormapped = j.value("colormapped", false);
  spec.image_height = j.at("imageHeight").get<std::size_t>();
  spec.image_width = j.at("imageWidth").get<std::size_t>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

nlohmann::json to_json(const DatasetManifest& manifest) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json je{{"id", e.id},
                      {"label", to_string(e.label)},
                      {"image", e.image},
                      {"highlightMask", e.highlight_mask},
                      {"shadowMask", e.shadow_mask},
                      {"spec", to_json(e.spec)}};
    je["noisyImage"] = e.noisy_image.empty() ? nlohmann::json(nullptr) : nlohmann::json(e.noisy_image);
    if (!e.predicted_shadow_mask.empty()) je["predictedShadowMask"] = e.predicted_shadow_mask;
    if (e.noise) {
      je["noise"] = noise::to_json(*e.noise);
      je["noiseSeed"] = e.noise_seed;
    } else {
      je["noise"] = nullptr;
    }
    entries.push_back(std::move(je));
  }
  return {{"generatorVersion", manifest.generator_version},
          {"globalSeed", manifest.global_seed},
          {"defaults", manifest.defaults},
          {"entries", std::move(entries)}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    m.generator_version = j.value("generatorVersion", std::string(kGeneratorVersion));
    m.global_seed = j.value("globalSeed", std::uint64_t{0});
    m.defaults = j.value("defaults", nlohmann::json::object());
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      e.label = parse_class(je.at("label").get<std::string>());
      e.image = je.at("image").get<std::string>();
      if (je.contains("noisyImage") && !je["noisyImage"].is_null()) e.noisy_image = je["noisyImage"].get<std::string>();
      e.highlight_mask = je.value("highlightMask", std::string());
      e.shadow_mask = je.value("shadowMask", std::string());
      e.predicted_shadow_mask = je.value("predictedShadowMask", std::string());
      if (je.contains("spec")) e.spec = spec_from_json(je["spec"]);
      if (je.contains("noise") && !je["noise"].is_null()) {
        e.noise = noise::profile_from_json(je["noise"]);
        e.noise_seed = je.value("noiseSeed", std::uint64_t{0});
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DomainError(std::string("manifest: ") + ex.what());
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  io::write_text_atomic(path, to_json(manifest).dump(2) + "\n");
}

// ---- generation ------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(global_seed ^ splitmix64(stream + 0x51ED27A1ULL)) + index);
}

SceneSpec sample_spec(const DatasetOptions& options, ObjectClass label, std::size_t index) {
  const std::uint64_t seed = derive_seed(options.seed, static_cast<std::uint64_t>(label) + 1, index);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SceneSpec spec;
  spec.label = label;
  spec.sonar_altitude_m = options.sonar_altitude_m;
  spec.pixels_per_meter = options.pixels_per_meter;
  spec.image_height = options.image_size;
  spec.image_width = options.image_size;
  spec.orientation_deg = 360.0 * unit(rng);
  spec.ground_range_m = options.min_ground_range_m + (options.max_ground_range_m - options.min_ground_range_m) * unit(rng);
  spec.object_scale = 0.85 + 0.3 * unit(rng);
  spec.object_height_m = nominal_height(label) * (0.85 + 0.3 * unit(rng));
  const bool nadir = unit(rng) < options.nadir_probability;
  spec.nadir_width_px = nadir ? static_cast<int>(options.image_size / 16) : 0;
  spec.colormapped = unit(rng) < options.colormap_probability;
  spec.seed = splitmix64(seed);
  return spec;
}

GenerationResult generate_dataset(const DatasetOptions& options) {
  require(!options.classes.empty(), "generate_dataset: no classes selected");
  GenerationResult result;
  DatasetManifest& manifest = result.manifest;
  manifest.global_seed = options.seed;
  manifest.base_dir = options.output_dir;
  manifest.defaults = {{"imageSize", options.image_size},
                       {"pixelsPerMeter", options.pixels_per_meter},
                       {"sonarAltitude", options.sonar_altitude_m},
                       {"groundRangeMin", options.min_ground_range_m},
                       {"groundRangeMax", options.max_ground_range_m},
                       {"nadirProbability", options.nadir_probability},
                       {"colormapProbability", options.colormap_probability},
                       {"countPerClass", options.count_per_class},
                       {"noiseProfile", noise::to_json(options.noise)}};

  for (std::size_t i = 0; i < options.count_per_class; ++i) {
    for (ObjectClass label : options.classes) {
      ManifestEntry entry;
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "%05zu", i);
      entry.id = to_string(label) + "_" + suffix;
      entry.label = label;
      entry.spec = sample_spec(options, label, i);
      entry.image = "clean/" + entry.id + ".png";
      entry.highlight_mask = "masks/" + entry.id + "_highlight.png";
      entry.shadow_mask = "masks/" + entry.id + "_shadow.png";
      try {
        const SceneRecord record = render_scene(entry.spec);
        io::write_image(options.output_dir / entry.image, record.image);
        io::write_mask(options.output_dir / entry.highlight_mask, record.highlight_mask);
        io::write_mask(options.output_dir / entry.shadow_mask, record.shadow_mask);
        if (!options.noise.is_identity()) {
          entry.noise = options.noise;
          entry.noise_seed = derive_seed(options.seed, 0xB0157ULL, static_cast<std::uint64_t>(label) * 1000003ULL + i);
          entry.noisy_image = "noisy/" + entry.id + ".png";
          io::write_image(options.output_dir / entry.noisy_image,
                          noise::apply_profile(record.image, options.noise, entry.noise_seed));
        }
        manifest.entries.push_back(std::move(entry));
      } catch (const std::exception& e) {
        result.failures.push_back({entry.id, e.what()});
      }
    }
  }
  save_manifest(manifest, options.output_dir / options.manifest_name);
  return result;
}

}  // namespace sonarfuse::scene

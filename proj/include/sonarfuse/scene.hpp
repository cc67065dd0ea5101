#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/noise.hpp"
#include "sonarfuse/raster.hpp"

namespace sonarfuse::scene {

enum class ObjectClass { Ship, Plane, MineCylinder, MineSphere, MineTruncatedCone };

inline constexpr ObjectClass kAllClasses[] = {ObjectClass::Ship, ObjectClass::Plane, ObjectClass::MineCylinder,
                                              ObjectClass::MineSphere, ObjectClass::MineTruncatedCone};

std::string to_string(ObjectClass c);
ObjectClass parse_class(const std::string& name);
/// Nominal object height above the seabed, meters.
double nominal_height(ObjectClass c);

/// One side-scan scene. Rows run down-range: the shadow extends toward larger row indices.
struct SceneSpec {
  ObjectClass label = ObjectClass::MineSphere;
  double object_height_m = 1.0;
  double sonar_altitude_m = 10.0;
  double ground_range_m = 15.0;
  double pixels_per_meter = 10.0;
  double orientation_deg = 0.0;
  /// Multiplies the nominal footprint dimensions of the class.
  double object_scale = 1.0;
  int nadir_width_px = 0;
  bool colormapped = false;
  std::size_t image_height = 256;
  std::size_t image_width = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Flat-seabed similar triangles: h * R / (A - h), meters.
double shadow_length_m(const SceneSpec& spec);
/// round(shadow_length_m * pixels_per_meter).
int shadow_length_px(const SceneSpec& spec);

struct SceneRecord {
  Raster image;
  BinaryMask highlight_mask;
  BinaryMask shadow_mask;
  ObjectClass label = ObjectClass::MineSphere;
  SceneSpec spec;
};

SceneRecord render_scene(const SceneSpec& spec);

/// Fixed copper-tone palette applied to 8-bit quantized intensities.
Raster apply_colormap(const Plane& gray);

/// Soft region weights: union of highlight and shadow, blurred with a 7x7 box.
RegionMask region_mask_from_scene(const BinaryMask& highlight, const BinaryMask& shadow, int blur = 7);

// ---- datasets --------------------------------------------------------------

inline constexpr const char* kGeneratorVersion = "sonarfuse-scene/1.0";

struct ManifestEntry {
  std::string id;
  ObjectClass label = ObjectClass::MineSphere;
  std::string image;           // clean image, relative to the manifest directory
  std::string noisy_image;     // empty when no noise was applied
  std::string highlight_mask;
  std::string shadow_mask;
  std::string predicted_shadow_mask;  // filled by the segment stage, optional
  SceneSpec spec;
  std::optional<noise::NoiseProfile> noise;
  std::uint64_t noise_seed = 0;
};

struct DatasetManifest {
  std::uint64_t global_seed = 0;
  std::string generator_version = kGeneratorVersion;
  nlohmann::json defaults = nlohmann::json::object();
  std::vector<ManifestEntry> entries;
  /// Directory that relative entry paths resolve against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
  /// The image a model should consume: the noisy rendition when present.
  std::filesystem::path input_image(const ManifestEntry& e) const {
    return resolve(e.noisy_image.empty() ? e.image : e.noisy_image);
  }
};

nlohmann::json to_json(const SceneSpec& spec);
SceneSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

DatasetManifest load_manifest(const std::filesystem::path& path);
/// Serialized as pretty JSON with a trailing newline; byte-stable for equal manifests.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct DatasetOptions {
  std::size_t count_per_class = 10;
  std::vector<ObjectClass> classes{std::begin(kAllClasses), std::end(kAllClasses)};
  noise::NoiseProfile noise = noise::named_profile("none");
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::size_t image_size = 256;
  double pixels_per_meter = 10.0;
  double sonar_altitude_m = 10.0;
  double min_ground_range_m = 10.0;
  double max_ground_range_m = 20.0;
  /// Probability that a scene carries a nadir stripe.
  double nadir_probability = 0.0;
  double colormap_probability = 0.0;
  std::string manifest_name = "manifest.json";
};

struct GenerationFailure {
  std::string id;
  std::string message;
};

struct GenerationResult {
  DatasetManifest manifest;
  std::vector<GenerationFailure> failures;
};

/// Randomized spec for the index-th scene of a class; depends only on (options, class, index).
SceneSpec sample_spec(const DatasetOptions& options, ObjectClass label, std::size_t index);

/// Order-independent per-item seed derived from a global seed.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream, std::uint64_t index);

GenerationResult generate_dataset(const DatasetOptions& options);

}  // namespace sonarfuse::scene

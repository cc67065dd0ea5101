#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/raster.hpp"

namespace sonarfuse::noise {

/// Axis along which echoes travel. Rows means delays move content toward larger row indices.
enum class RangeAxis { Rows, Columns };

struct MultipathPath {
  int delay = 1;             // pixels along the range axis, >= 1
  double attenuation = 0.5;  // [0,1]
};

struct MultipathParams {
  std::vector<MultipathPath> paths;
};

struct BackscatterParams {
  double looks = 4.0;  // gamma shape; speckle variance is 1/looks
};

struct ReverbParams {
  double decay = 0.6;  // (0,1)
  int length = 5;      // taps >= 1
  double mix = 0.3;    // [0,1]
};

void validate(const MultipathParams& p);
void validate(const BackscatterParams& p);
void validate(const ReverbParams& p);

/// img + sum_j a_j * shift(img, d_j), clipped to [0,1]. Vacated pixels are 0.
Raster apply_multipath(const Raster& img, const MultipathParams& p, RangeAxis axis = RangeAxis::Rows);

/// Multiplicative unit-mean gamma speckle, one multiplier per pixel shared across channels.
Raster apply_backscatter(const Raster& img, const BackscatterParams& p, std::uint64_t seed);

/// Causal normalized geometric kernel: decay^t / sum(decay^t), t = 0..length-1.
std::vector<double> reverb_kernel(const ReverbParams& p);

/// (1-mix) img + mix (img * kernel) along the range axis, clipped to [0,1].
/// Samples before the first range bin repeat the first bin.
Raster apply_reverberation(const Raster& img, const ReverbParams& p, RangeAxis axis = RangeAxis::Rows);

/// A full corruption recipe. Stages run in the order multipath, reverberation, backscatter.
struct NoiseProfile {
  std::string name = "none";
  std::optional<MultipathParams> multipath;
  std::optional<ReverbParams> reverb;
  std::optional<BackscatterParams> backscatter;
  RangeAxis axis = RangeAxis::Rows;

  bool is_identity() const { return !multipath && !reverb && !backscatter; }
};

/// Named presets: "none", "light", "default", "heavy".
NoiseProfile named_profile(const std::string& name);

Raster apply_profile(const Raster& img, const NoiseProfile& profile, std::uint64_t seed);

/// "d:a,d:a" -> paths.
MultipathParams parse_multipath(const std::string& text);
/// "decay,length,mix" -> params.
ReverbParams parse_reverb(const std::string& text);

nlohmann::json to_json(const NoiseProfile& profile);
NoiseProfile profile_from_json(const nlohmann::json& j);

}  // namespace sonarfuse::noise

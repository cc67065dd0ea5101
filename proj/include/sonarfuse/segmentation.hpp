#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sonarfuse/imaging.hpp"
#include "sonarfuse/raster.hpp"

namespace sonarfuse::segmentation {

/// Which end of the log spectral-ratio distribution is labeled shadow.
enum class ShadowPolarity {
  /// Dark pixels raise (H+1)/(L+1); the highest log-SR cluster is shadow.
  HighRatio,
  /// The lowest log-SR cluster is shadow.
  LowRatio,
};

std::string to_string(ShadowPolarity polarity);
ShadowPolarity parse_polarity(const std::string& text);

struct SegmentationConfig {
  int kernel_size = 5;  // n, odd
  int k = 2;            // clusters used = k + 1
  int disk_radius = 3;
  std::uint64_t seed = 0;
  ShadowPolarity polarity = ShadowPolarity::HighRatio;

  void validate() const;
};

/// ln((H+1)/(L+1) + 1) per pixel for normalized lightness and hue planes.
Plane spectral_ratio_map(const Plane& lightness, const Plane& hue);

struct ThresholdResult {
  double threshold = 0.0;
  /// Only one cluster was available; threshold is +inf and every pixel is shadow.
  bool degenerate = false;
};

/// Minimum of the second-lowest-centroid cluster. Samples strictly below it are shadow.
ThresholdResult shadow_threshold(const imaging::KMeansResult& clusters);

/// Intermediate planes of one segmentation run, exposed for diagnostics and overlays.
struct SegmentationTrace {
  Plane lightness;  // normalized
  Plane hue;        // normalized
  Plane log_ratio;
  Plane smoothed;
  ThresholdResult threshold;
  BinaryMask raw_mask;  // before closing
};

ShadowMask segment_shadows(const Raster& img, const SegmentationConfig& cfg,
                           SegmentationTrace* trace = nullptr);

/// Pixels of `values` strictly below `threshold` (after polarity mapping) as a mask.
BinaryMask label_below(const Plane& values, double threshold);

/// Red-tinted overlay of a mask on a grayscale rendition of the image.
Raster overlay(const Raster& img, const ShadowMask& mask);

}  // namespace sonarfuse::segmentation

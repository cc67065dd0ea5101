#pragma once

#include <vector>

#include "sonarfuse/raster.hpp"

namespace sonarfuse::fusion {

inline constexpr std::size_t kFeatureDim = 96;
inline constexpr std::size_t kPoolGrid = 8;
inline constexpr std::size_t kHistogramBins = 16;
inline constexpr std::size_t kShapeStats = 8;

/// Combined-stream (F1) and shadow-stream (F2) descriptors of one image.
struct StreamFeatures {
  std::vector<double> combined;  // F1
  std::vector<double> shadow;    // F2
};

/// F1: 8x8 mean-pooled smoothed intensity over an object-centered window (anchored at the
///     brightest smoothed pixel), 16-bin histogram, 8 gradient statistics, then 8 shape
///     statistics of the bright blob.
/// F2: the same pooled grid over the shadow-masked image, a histogram of the shadow pixels,
///     8 gradient statistics, then 8 shadow shape statistics (area fraction, bounding-box
///     aspect, centroid offset (rows, cols), perimeter/area, bounding-box height and width
///     fractions, fill ratio).
/// An empty mask yields zeros for every shadow-derived entry.
StreamFeatures extract_features(const Raster& img, const ShadowMask& mask);

/// Offset of the shape-statistics block inside either stream.
inline constexpr std::size_t kShapeOffset = kFeatureDim - kShapeStats;
inline constexpr std::size_t kShapeAspectIndex = kShapeOffset + 1;

}  // namespace sonarfuse::fusion

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sonarfuse/raster.hpp"

namespace sonarfuse::imaging {

// ---- color -----------------------------------------------------------------

/// sRGB in [0,1] -> CIE L*a*b* (D65). Channel 0 is L* in [0,100].
Raster rgb_to_lab(const Raster& img);
/// Inverse of rgb_to_lab (no gamut clipping).
Raster lab_to_rgb(const Raster& lab);
/// L*a*b* -> L, C = |(a,b)|, H = atan2(b,a) in degrees within [0,360).
/// Hue is 0 where chroma is below kAchromaticChroma.
Raster lab_to_lch(const Raster& lab);

inline constexpr double kAchromaticChroma = 1e-9;

// ---- planes ----------------------------------------------------------------

/// Min-max scaling to [0,1]; a constant plane maps to zeros.
Plane normalize_plane(const Plane& p);

/// Mean over an n x n window with mirror padding (edge pixel not repeated).
/// n must be odd and positive.
Plane convolve_uniform(const Plane& p, int n);

/// Mirror index into [0, n) without repeating the edge sample.
std::size_t reflect_index(long i, std::size_t n);

// ---- 1-D k-means -----------------------------------------------------------

struct KMeansOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;
  /// Independent k-means++ restarts; the lowest objective wins.
  int restarts = 8;
  /// Inputs up to this size also try a start at the exact optimal contiguous partition
  /// (dynamic programming over the sorted values).
  std::size_t exact_seed_limit = 1024;
};

struct KMeansResult {
  std::vector<double> centroids;        // ascending
  std::vector<std::size_t> assignment;  // per input sample, index into centroids
  std::vector<double> per_cluster_min;
  std::size_t requested_clusters = 0;
  /// Set when fewer distinct values than requested clusters were available.
  bool reduced = false;
  double objective = 0.0;
  int iterations = 0;
  /// Objective after every Lloyd update of the winning restart.
  std::vector<double> objective_trace;
};

KMeansResult kmeans_1d(std::span<const double> values, std::size_t clusters, std::uint64_t seed,
                       const KMeansOptions& options = {});

/// Sum of squared distances of every sample to its assigned centroid.
double kmeans_objective(std::span<const double> values, const KMeansResult& result);

// ---- morphology ------------------------------------------------------------

struct StructuringElement {
  int radius = 0;
  std::vector<std::pair<int, int>> offsets;  // (dy, dx)

  static StructuringElement disk(int radius);
};

/// Dilation treats pixels outside the image as 0, erosion treats them as 1,
/// so the pair is adjoint and closing/opening are idempotent.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
BinaryMask morph_close(const BinaryMask& mask, const StructuringElement& se);
BinaryMask morph_open(const BinaryMask& mask, const StructuringElement& se);

}  // namespace sonarfuse::imaging

#include "sonarfuse/segmentation.hpp"

#include <cmath>
#include <limits>

#include "sonarfuse/error.hpp"

namespace sonarfuse::segmentation {

std::string to_string(ShadowPolarity polarity) {
  return polarity == ShadowPolarity::HighRatio ? "high" : "low";
}

ShadowPolarity parse_polarity(const std::string& text) {
  if (text == "high") return ShadowPolarity::HighRatio;
  if (text == "low") return ShadowPolarity::LowRatio;
  throw DomainError("unknown shadow polarity '" + text + "' (expected high or low)");
}

void SegmentationConfig::validate() const {
  require(kernel_size >= 1 && kernel_size % 2 == 1, "segmentation: kernel size must be odd and >= 1");
  require(k >= 1, "segmentation: k must be >= 1");
  require(disk_radius >= 1, "segmentation: disk radius must be >= 1");
}

Plane spectral_ratio_map(const Plane& lightness, const Plane& hue) {
  if (!lightness.same_shape(hue)) throw DomainError("spectral_ratio_map: plane shapes differ");
  Plane out(lightness.height(), lightness.width());
  auto l = lightness.data();
  auto h = hue.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double ratio = (h[i] + 1.0) / (l[i] + 1.0);
    dst[i] = std::log(ratio + 1.0);
  }
  return out;
}

ThresholdResult shadow_threshold(const imaging::KMeansResult& clusters) {
  if (clusters.centroids.size() < 2)
    return {std::numeric_limits<double>::infinity(), true};
  return {clusters.per_cluster_min[1], false};
}

BinaryMask label_below(const Plane& values, double threshold) {
  BinaryMask mask(values.height(), values.width());
  auto src = values.data();
  auto bits = mask.bits();
  for (std::size_t i = 0; i < src.size(); ++i) bits[i] = src[i] < threshold ? 1 : 0;
  return mask;
}

ShadowMask segment_shadows(const Raster& img, const SegmentationConfig& cfg, SegmentationTrace* trace) {
  cfg.validate();
  if (img.empty()) throw DomainError("segment_shadows: empty image");
  const Raster lch = imaging::lab_to_lch(imaging::rgb_to_lab(to_rgb(img)));
  Plane lightness = imaging::normalize_plane(channel_plane(lch, 0));
  Plane hue = imaging::normalize_plane(channel_plane(lch, 2));
  Plane log_ratio = spectral_ratio_map(lightness, hue);
  Plane smoothed = imaging::convolve_uniform(log_ratio, cfg.kernel_size);

  // Clustering always isolates the low end; high polarity mirrors the values first.
  Plane oriented = smoothed;
  if (cfg.polarity == ShadowPolarity::HighRatio)
    for (double& v : oriented.data()) v = -v;

  const auto clusters =
      imaging::kmeans_1d(oriented.data(), static_cast<std::size_t>(cfg.k) + 1, cfg.seed);
  const ThresholdResult threshold = shadow_threshold(clusters);
  BinaryMask raw = label_below(oriented, threshold.threshold);
  ShadowMask mask = imaging::morph_close(raw, imaging::StructuringElement::disk(cfg.disk_radius));

  if (trace) {
    trace->lightness = std::move(lightness);
    trace->hue = std::move(hue);
    trace->log_ratio = std::move(log_ratio);
    trace->smoothed = std::move(smoothed);
    trace->threshold = threshold;
    trace->raw_mask = std::move(raw);
  }
  return mask;
}

Raster overlay(const Raster& img, const ShadowMask& mask) {
  require(img.height() == mask.height() && img.width() == mask.width(), "overlay: shape mismatch");
  const Plane gray = to_gray(img);
  Raster out(img.height(), img.width(), 3);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double g = gray.at(y, x);
      if (mask.at(y, x)) {
        out.at(y, x, 0) = 0.5 * g + 0.5;
        out.at(y, x, 1) = 0.5 * g;
        out.at(y, x, 2) = 0.5 * g;
      } else {
        for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = g;
      }
    }
  }
  return out;
}

}  // namespace sonarfuse::segmentation

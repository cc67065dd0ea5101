#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonarfuse/raster.hpp"

namespace sonarfuse::metrics {

/// 10 log10(1 / MSE) with peak 1.0; +inf when the images are identical.
double psnr(const Raster& a, const Raster& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean local SSIM over all fully contained Gaussian windows. Single-channel inputs only.
double ssim(const Raster& a, const Raster& b, const SsimOptions& options = {});
double ssim(const Plane& a, const Plane& b, const SsimOptions& options = {});

/// |a & b| / |a | b|; two empty masks give 1.
double iou(const BinaryMask& a, const BinaryMask& b);

double mse(const Raster& a, const Raster& b);
/// sum w (a-b)^2 / sum w over single-channel images; 0 when the weights vanish.
double weighted_mse(const Plane& a, const Plane& b, const Plane& weights);

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  void add(std::size_t truth, std::size_t predicted);
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * classes_ + predicted]; }
  std::size_t classes() const { return classes_; }
  std::size_t total() const;
  /// Fraction of correct predictions; 0 for an empty matrix.
  double accuracy() const;
  nlohmann::json to_json() const;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

struct QualityReport {
  std::string method_id;
  std::string image_id;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> iou;
};

/// PSNR +inf is written as the string "inf".
nlohmann::json to_json(const QualityReport& report);

}  // namespace sonarfuse::metrics

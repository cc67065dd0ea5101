#include "sonarfuse/metrics.hpp"

#include <cmath>
#include <limits>

#include "sonarfuse/error.hpp"

namespace sonarfuse::metrics {

double mse(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) throw DomainError("mse: image shapes differ");
  require(!a.empty(), "mse: empty images");
  double sum = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - y[i]) * (x[i] - y[i]);
  return sum / static_cast<double>(x.size());
}

double psnr(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) throw DomainError("psnr: image shapes differ");
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / err);
}

double ssim(const Raster& a, const Raster& b, const SsimOptions& options) {
  if (a.channels() != 1 || b.channels() != 1) throw DomainError("ssim: single-channel images required");
  return ssim(channel_plane(a, 0), channel_plane(b, 0), options);
}

double ssim(const Plane& a, const Plane& b, const SsimOptions& options) {
  if (!a.same_shape(b)) throw DomainError("ssim: image shapes differ");
  const std::size_t win = static_cast<std::size_t>(options.window);
  if (a.height() < win || a.width() < win) throw DomainError("ssim: images smaller than the window");

  std::vector<double> kernel(win * win);
  const double r = (static_cast<double>(win) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t y = 0; y < win; ++y)
    for (std::size_t x = 0; x < win; ++x) {
      const double dy = static_cast<double>(y) - r, dx = static_cast<double>(x) - r;
      kernel[y * win + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * options.sigma * options.sigma));
      total += kernel[y * win + x];
    }
  for (double& k : kernel) k /= total;

  const double c1 = (options.k1 * options.dynamic_range) * (options.k1 * options.dynamic_range);
  const double c2 = (options.k2 * options.dynamic_range) * (options.k2 * options.dynamic_range);
  double sum = 0.0;
  std::size_t windows = 0;
  for (std::size_t y0 = 0; y0 + win <= a.height(); ++y0) {
    for (std::size_t x0 = 0; x0 + win <= a.width(); ++x0) {
      double mu_a = 0.0, mu_b = 0.0;
      for (std::size_t y = 0; y < win; ++y)
        for (std::size_t x = 0; x < win; ++x) {
          const double k = kernel[y * win + x];
          mu_a += k * a.at(y0 + y, x0 + x);
          mu_b += k * b.at(y0 + y, x0 + x);
        }
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (std::size_t y = 0; y < win; ++y)
        for (std::size_t x = 0; x < win; ++x) {
          const double k = kernel[y * win + x];
          const double da = a.at(y0 + y, x0 + x) - mu_a;
          const double db = b.at(y0 + y, x0 + x) - mu_b;
          var_a += k * da * da;
          var_b += k * db * db;
          cov += k * da * db;
        }
      sum += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++windows;
    }
  }
  return sum / static_cast<double>(windows);
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw DomainError("iou: mask shapes differ");
  std::size_t inter = 0, uni = 0;
  auto x = a.bits();
  auto y = b.bits();
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += (x[i] && y[i]) ? 1 : 0;
    uni += (x[i] || y[i]) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double weighted_mse(const Plane& a, const Plane& b, const Plane& weights) {
  if (!a.same_shape(b) || !a.same_shape(weights)) throw DomainError("weighted_mse: shapes differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += weights.data()[i] * d * d;
    den += weights.data()[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  require(classes >= 1, "ConfusionMatrix: need at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  require(truth < classes_ && predicted < classes_, "ConfusionMatrix: class index out of range");
  ++counts_[truth * classes_ + predicted];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < classes_; ++i) correct += at(i, i);
  return static_cast<double>(correct) / static_cast<double>(n);
}

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < classes_; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < classes_; ++p) row.push_back(at(t, p));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const QualityReport& report) {
  nlohmann::json j{{"methodId", report.method_id}, {"imageId", report.image_id}, {"ssim", report.ssim}};
  j["psnr"] = std::isinf(report.psnr) ? nlohmann::json("inf") : nlohmann::json(report.psnr);
  j["iou"] = report.iou ? nlohmann::json(*report.iou) : nlohmann::json(nullptr);
  return j;
}

}  // namespace sonarfuse::metrics

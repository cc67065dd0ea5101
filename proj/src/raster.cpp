#include "sonarfuse/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sonarfuse/error.hpp"

namespace sonarfuse {

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite value");
  }
}

}  // namespace

Raster::Raster(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
  require(channels == 1 || channels == 3, "Raster: channels must be 1 or 3");
  require(std::isfinite(fill), "Raster: non-finite fill");
}

Raster::Raster(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  require(channels == 1 || channels == 3, "Raster: channels must be 1 or 3");
  require(data_.size() == height * width * channels, "Raster: data length does not match shape");
  check_finite(data_, "Raster");
}

Plane::Plane(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width, fill) {}

Plane::Plane(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  require(data_.size() == height * width, "Plane: data length does not match shape");
  check_finite(data_, "Plane");
}

BinaryMask::BinaryMask(std::size_t height, std::size_t width, bool fill)
    : height_(height), width_(width), bits_(height * width, fill ? 1 : 0) {}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Plane channel_plane(const Raster& img, std::size_t channel) {
  require(channel < img.channels(), "channel_plane: channel out of range");
  Plane out(img.height(), img.width());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) out.at(y, x) = img.at(y, x, channel);
  return out;
}

Raster plane_to_raster(const Plane& plane) {
  return Raster(plane.height(), plane.width(), 1,
                std::vector<double>(plane.data().begin(), plane.data().end()));
}

Plane mask_to_plane(const BinaryMask& mask) {
  Plane out(mask.height(), mask.width());
  auto bits = mask.bits();
  auto dst = out.data();
  for (std::size_t i = 0; i < bits.size(); ++i) dst[i] = bits[i] ? 1.0 : 0.0;
  return out;
}

Plane to_gray(const Raster& img) {
  Plane out(img.height(), img.width());
  const std::size_t c = img.channels();
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      double sum = 0.0;
      for (std::size_t k = 0; k < c; ++k) sum += img.at(y, x, k);
      out.at(y, x) = c == 1 ? sum : sum / static_cast<double>(c);
    }
  }
  return out;
}

Raster to_rgb(const Raster& img) {
  if (img.channels() == 3) return img;
  Raster out(img.height(), img.width(), 3);
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t k = 0; k < 3; ++k) out.at(y, x, k) = img.at(y, x);
  return out;
}

}  // namespace sonarfuse

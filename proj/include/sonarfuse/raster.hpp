#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sonarfuse {

/// Dense H x W x C image, row-major with interleaved channels.
/// Intensities are nominally in [0,1]; 8-bit scaling only happens at I/O.
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  Raster(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t pixel_count() const { return height_ * width_; }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t y, std::size_t x, std::size_t c = 0) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Raster& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  bool operator==(const Raster&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Single-channel unbounded scalar field (lightness, hue, spectral ratio, ...).
class Plane {
 public:
  Plane() = default;
  Plane(std::size_t height, std::size_t width, double fill = 0.0);
  Plane(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }
  double at(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Plane& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool operator==(const Plane&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Binary per-pixel mask; 1 marks membership (shadow, highlight, ...).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t height, std::size_t width, bool fill = false);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool at(std::size_t y, std::size_t x) const { return bits_[y * width_ + x] != 0; }
  void set(std::size_t y, std::size_t x, bool value) { bits_[y * width_ + x] = value ? 1 : 0; }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }

  std::size_t count() const;
  bool same_shape(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

using ShadowMask = BinaryMask;

/// Soft per-pixel weights in [0,1]; 1 marks a critical region.
using RegionMask = Plane;

Plane channel_plane(const Raster& img, std::size_t channel);
Raster plane_to_raster(const Plane& plane);
Plane mask_to_plane(const BinaryMask& mask);
/// Channel-wise mean; a 1-channel raster is copied unchanged.
Plane to_gray(const Raster& img);
/// Replicates a 1-channel raster into 3 identical channels.
Raster to_rgb(const Raster& img);

}  // namespace sonarfuse

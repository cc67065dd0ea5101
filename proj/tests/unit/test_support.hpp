#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "sonarfuse/raster.hpp"

namespace sonarfuse::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Raster random_raster(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed);
Plane random_plane(std::size_t h, std::size_t w, std::uint64_t seed, double lo = 0.0, double hi = 1.0);
BinaryMask random_mask(std::size_t h, std::size_t w, double p, std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);

}  // namespace sonarfuse::testing

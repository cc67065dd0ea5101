#pragma once

#include <filesystem>
#include <string>

#include "sonarfuse/raster.hpp"

namespace sonarfuse::io {

// Format is chosen by extension: .png, .pgm (1 channel) or .ppm (3 channels).
// 8-bit codes map linearly to [0,1] (v / 255 on read, round(255 v) on write).

Raster read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Raster& img);

/// Masks are stored as single-channel 0/255 images; codes >= 128 read as 1.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

/// Soft region masks: gray image, code / 255.
RegionMask read_region_mask(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);
void write_bytes_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_text(const std::filesystem::path& path);

/// Quantizes an intensity to an 8-bit code (clamped, round-half-up).
unsigned char to_byte(double v);

}  // namespace sonarfuse::io

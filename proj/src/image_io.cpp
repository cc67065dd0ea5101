#include "sonarfuse/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "sonarfuse/error.hpp"

namespace sonarfuse::io {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

fs::path temp_sibling(const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  return tmp;
}

void commit(const fs::path& tmp, const fs::path& path) {
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
}

// ---- PNG ----------------------------------------------------------------

Raster read_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError("not a PNG file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng: decode failure in " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  png_read_update_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw IoError("unsupported PNG channel count in " + path.string());
  std::vector<double> data(static_cast<std::size_t>(width) * height * channels);
  for (png_uint_32 y = 0; y < height; ++y)
    for (std::size_t i = 0; i < static_cast<std::size_t>(width) * channels; ++i)
      data[y * width * channels + i] = rows[y][i] / 255.0;
  return Raster(height, width, static_cast<std::size_t>(channels), std::move(data));
}

void write_png(const fs::path& path, const Raster& img) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }
  const std::size_t row_len = img.width() * img.channels();
  std::vector<unsigned char> bytes(row_len * img.height());
  auto src = img.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(src[i]);
  std::vector<png_bytep> rows(img.height());
  for (std::size_t y = 0; y < img.height(); ++y) rows[y] = bytes.data() + y * row_len;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng: encode failure for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---- PGM / PPM ------------------------------------------------------------

int read_header_int(std::istream& in) {
  int value = -1;
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> value;
  return value;
}

Raster read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  std::size_t channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw IoError("unsupported PNM magic in " + path.string());
  const int width = read_header_int(in);
  const int height = read_header_int(in);
  const int maxval = read_header_int(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw IoError("invalid PNM header in " + path.string());
  in.get();
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  std::vector<unsigned char> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw IoError("truncated PNM data in " + path.string());
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(bytes[i]) / maxval;
  return Raster(static_cast<std::size_t>(height), static_cast<std::size_t>(width), channels, std::move(data));
}

void write_pnm(const fs::path& path, const Raster& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  std::string bytes;
  bytes.reserve(img.data().size());
  for (double v : img.data()) bytes.push_back(static_cast<char>(to_byte(v)));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure for " + path.string());
}

}  // namespace

unsigned char to_byte(double v) {
  const double scaled = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<unsigned char>(scaled);
}

Raster read_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  throw IoError("unsupported image extension: " + path.string());
}

void write_image(const fs::path& path, const Raster& img) {
  const std::string ext = lower_extension(path);
  ensure_parent(path);
  const fs::path tmp = temp_sibling(path);
  if (ext == ".png") {
    write_png(tmp, img);
  } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm" && img.channels() != 1) || (ext == ".ppm" && img.channels() != 3))
      throw DomainError("channel count does not match extension of " + path.string());
    write_pnm(tmp, img);
  } else {
    throw IoError("unsupported image extension: " + path.string());
  }
  commit(tmp, path);
}

BinaryMask read_mask(const fs::path& path) {
  const Plane gray = to_gray(read_image(path));
  BinaryMask mask(gray.height(), gray.width());
  for (std::size_t y = 0; y < gray.height(); ++y)
    for (std::size_t x = 0; x < gray.width(); ++x) mask.set(y, x, gray.at(y, x) >= 128.0 / 255.0);
  return mask;
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  write_image(path, plane_to_raster(mask_to_plane(mask)));
}

RegionMask read_region_mask(const fs::path& path) { return to_gray(read_image(path)); }

void write_text_atomic(const fs::path& path, const std::string& contents) {
  write_bytes_atomic(path, contents);
}

void write_bytes_atomic(const fs::path& path, const std::string& bytes) {
  ensure_parent(path);
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure for " + tmp.string());
  }
  commit(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sonarfuse::io

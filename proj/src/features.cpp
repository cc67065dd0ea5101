#include "sonarfuse/features.hpp"

#include <algorithm>
#include <cmath>

#include "sonarfuse/error.hpp"
#include "sonarfuse/imaging.hpp"

namespace sonarfuse::fusion {

namespace {

struct Window {
  std::size_t top = 0, left = 0, height = 0, width = 0;
};

// 8x8 grid of block means over a window of the plane.
void append_pooled(const Plane& g, const Window& win, std::vector<double>& out) {
  for (std::size_t by = 0; by < kPoolGrid; ++by) {
    const std::size_t y0 = win.top + by * win.height / kPoolGrid, y1 = win.top + (by + 1) * win.height / kPoolGrid;
    for (std::size_t bx = 0; bx < kPoolGrid; ++bx) {
      const std::size_t x0 = win.left + bx * win.width / kPoolGrid;
      const std::size_t x1 = win.left + (bx + 1) * win.width / kPoolGrid;
      double sum = 0.0;
      for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x) sum += g.at(y, x);
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      out.push_back(n > 0 ? sum / n : 0.0);
    }
  }
}

void append_pooled(const Plane& g, std::vector<double>& out) {
  append_pooled(g, Window{0, 0, g.height(), g.width()}, out);
}

// Window anchored on the brightest smoothed pixel: half the image on each axis, starting a
// little up-range of the highlight so the down-range shadow falls inside it.
Window object_window(const Plane& smooth) {
  const std::size_t h = smooth.height(), w = smooth.width();
  std::size_t best = 0;
  for (std::size_t i = 1; i < smooth.size(); ++i)
    if (smooth.data()[i] > smooth.data()[best]) best = i;
  const long cy = static_cast<long>(best / w), cx = static_cast<long>(best % w);
  Window win;
  win.height = std::max<std::size_t>(kPoolGrid, h / 2);
  win.width = std::max<std::size_t>(kPoolGrid, w / 2);
  const long top = std::clamp(cy - static_cast<long>(h / 8), 0L, static_cast<long>(h - win.height));
  const long left = std::clamp(cx - static_cast<long>(win.width / 2), 0L, static_cast<long>(w - win.width));
  win.top = static_cast<std::size_t>(top);
  win.left = static_cast<std::size_t>(left);
  return win;
}

// Histogram of the selected pixels as fractions; all zeros when nothing is selected.
void append_histogram(const Plane& g, const ShadowMask* select, std::vector<double>& out) {
  std::vector<double> bins(kHistogramBins, 0.0);
  double n = 0.0;
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x) {
      if (select && !select->at(y, x)) continue;
      const double v = std::clamp(g.at(y, x), 0.0, 1.0);
      const auto b = std::min(static_cast<std::size_t>(v * kHistogramBins), kHistogramBins - 1);
      bins[b] += 1.0;
      n += 1.0;
    }
  for (double& b : bins) out.push_back(n > 0 ? b / n : 0.0);
}

struct GradientField {
  std::vector<double> gx, gy, mag;
};

GradientField gradients(const Plane& g) {
  const std::size_t h = g.height(), w = g.width();
  GradientField f;
  f.gx.assign(h * w, 0.0);
  f.gy.assign(h * w, 0.0);
  f.mag.assign(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t xl = x > 0 ? x - 1 : x, xr = x + 1 < w ? x + 1 : x;
      const std::size_t yu = y > 0 ? y - 1 : y, yd = y + 1 < h ? y + 1 : y;
      const double gx = (g.at(y, xr) - g.at(y, xl)) / 2.0;
      const double gy = (g.at(yd, x) - g.at(yu, x)) / 2.0;
      f.gx[y * w + x] = gx;
      f.gy[y * w + x] = gy;
      f.mag[y * w + x] = std::hypot(gx, gy);
    }
  return f;
}

void append_gradient_stats(const Plane& g, std::vector<double>& out) {
  const GradientField f = gradients(g);
  const double n = static_cast<double>(f.mag.size());
  double mean = 0.0, sq = 0.0, max = 0.0, ex = 0.0, ey = 0.0;
  double over[4] = {0, 0, 0, 0};
  constexpr double kLevels[4] = {0.05, 0.1, 0.2, 0.4};
  for (std::size_t i = 0; i < f.mag.size(); ++i) {
    const double m = f.mag[i];
    mean += m;
    sq += m * m;
    max = std::max(max, m);
    ex += f.gx[i] * f.gx[i];
    ey += f.gy[i] * f.gy[i];
    for (int k = 0; k < 4; ++k) over[k] += m > kLevels[k] ? 1.0 : 0.0;
  }
  mean /= n;
  const double stddev = std::sqrt(std::max(sq / n - mean * mean, 0.0));
  out.push_back(mean);
  out.push_back(stddev);
  out.push_back(max);
  for (int k = 0; k < 3; ++k) out.push_back(over[k] / n);
  out.push_back(ex / n);
  out.push_back(ey / n);
}

void append_shape_stats(const ShadowMask& mask, std::vector<double>& out) {
  const std::size_t h = mask.height(), w = mask.width();
  std::size_t area = 0, perimeter = 0;
  std::size_t top = h, bottom = 0, left = w, right = 0;
  double sy = 0.0, sx = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (!mask.at(y, x)) continue;
      ++area;
      sy += static_cast<double>(y);
      sx += static_cast<double>(x);
      top = std::min(top, y);
      bottom = std::max(bottom, y);
      left = std::min(left, x);
      right = std::max(right, x);
      const bool edge = y == 0 || x == 0 || y + 1 == h || x + 1 == w || !mask.at(y - 1, x) || !mask.at(y + 1, x) ||
                        !mask.at(y, x - 1) || !mask.at(y, x + 1);
      if (edge) ++perimeter;
    }
  if (area == 0) {
    for (std::size_t i = 0; i < kShapeStats; ++i) out.push_back(0.0);
    return;
  }
  const double a = static_cast<double>(area);
  const double box_h = static_cast<double>(bottom - top + 1);
  const double box_w = static_cast<double>(right - left + 1);
  out.push_back(a / static_cast<double>(h * w));
  out.push_back(box_h / box_w);
  out.push_back((sy / a) / static_cast<double>(h) - 0.5);
  out.push_back((sx / a) / static_cast<double>(w) - 0.5);
  out.push_back(static_cast<double>(perimeter) / a);
  out.push_back(box_h / static_cast<double>(h));
  out.push_back(box_w / static_cast<double>(w));
  out.push_back(a / (box_h * box_w));
}

double smooth_mean(const Plane& p) {
  double sum = 0.0;
  for (double v : p.data()) sum += v;
  return sum / static_cast<double>(p.size());
}

}  // namespace

StreamFeatures extract_features(const Raster& img, const ShadowMask& mask) {
  require(img.height() == mask.height() && img.width() == mask.width(),
          "extract_features: mask does not match image dimensions");
  require(img.height() >= kPoolGrid && img.width() >= kPoolGrid, "extract_features: image smaller than 8x8");
  const Plane gray = to_gray(img);

  // Combined stream: object-centred appearance of highlight and shadow together.
  const Plane smooth = imaging::convolve_uniform(gray, 5);
  BinaryMask bright(gray.height(), gray.width());
  const double peak = *std::max_element(smooth.data().begin(), smooth.data().end());
  const double level = 0.5 * (peak + smooth_mean(smooth));
  for (std::size_t y = 0; y < gray.height(); ++y)
    for (std::size_t x = 0; x < gray.width(); ++x) bright.set(y, x, smooth.at(y, x) > level);

  StreamFeatures f;
  f.combined.reserve(kFeatureDim);
  append_pooled(smooth, object_window(smooth), f.combined);
  append_histogram(gray, nullptr, f.combined);
  append_gradient_stats(gray, f.combined);
  append_shape_stats(bright, f.combined);

  Plane masked(gray.height(), gray.width());
  for (std::size_t i = 0; i < masked.size(); ++i) masked.data()[i] = mask.bits()[i] ? gray.data()[i] : 0.0;
  f.shadow.reserve(kFeatureDim);
  append_pooled(masked, f.shadow);
  append_histogram(gray, &mask, f.shadow);
  append_gradient_stats(masked, f.shadow);
  append_shape_stats(mask, f.shadow);

  if (f.combined.size() != kFeatureDim || f.shadow.size() != kFeatureDim)
    throw DomainError("extract_features: descriptor layout drifted from 96 entries");
  return f;
}

}  // namespace sonarfuse::fusion

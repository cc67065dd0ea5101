#include "sonarfuse/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sonarfuse/error.hpp"

namespace sonarfuse::imaging {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// sRGB primaries, D65.
constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};

constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

struct WhitePoint {
  double x, y, z;
};

// Reference white is the image of RGB (1,1,1) so white lands exactly on a* = b* = 0.
constexpr WhitePoint white_point() {
  return {kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
          kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
          kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2]};
}

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  return c <= 0.0031308 ? c * 12.92 : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) { return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }

double lab_f_inv(double f) {
  const double cube = f * f * f;
  return cube > kEpsilon ? cube : (116.0 * f - 16.0) / kKappa;
}

void require_three_channels(const Raster& img, const char* op) {
  if (img.channels() != 3) throw DomainError(std::string(op) + ": expected a 3-channel raster");
}

}  // namespace

Raster rgb_to_lab(const Raster& img) {
  require_three_channels(img, "rgb_to_lab");
  constexpr WhitePoint wp = white_point();
  Raster out(img.height(), img.width(), 3);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double r = srgb_to_linear(src[i]);
    const double g = srgb_to_linear(src[i + 1]);
    const double b = srgb_to_linear(src[i + 2]);
    const double x = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
    const double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
    const double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;
    const double fx = lab_f(x / wp.x);
    const double fy = lab_f(y / wp.y);
    const double fz = lab_f(z / wp.z);
    dst[i] = 116.0 * fy - 16.0;
    dst[i + 1] = 500.0 * (fx - fy);
    dst[i + 2] = 200.0 * (fy - fz);
  }
  return out;
}

Raster lab_to_rgb(const Raster& lab) {
  require_three_channels(lab, "lab_to_rgb");
  constexpr WhitePoint wp = white_point();
  static const Mat3 xyz_to_rgb = invert(kRgbToXyz);
  Raster out(lab.height(), lab.width(), 3);
  auto src = lab.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double fy = (src[i] + 16.0) / 116.0;
    const double fx = fy + src[i + 1] / 500.0;
    const double fz = fy - src[i + 2] / 200.0;
    const double x = lab_f_inv(fx) * wp.x;
    const double y = lab_f_inv(fy) * wp.y;
    const double z = lab_f_inv(fz) * wp.z;
    for (int c = 0; c < 3; ++c) {
      const double lin = xyz_to_rgb[c][0] * x + xyz_to_rgb[c][1] * y + xyz_to_rgb[c][2] * z;
      dst[i + c] = linear_to_srgb(lin);
    }
  }
  return out;
}

Raster lab_to_lch(const Raster& lab) {
  require_three_channels(lab, "lab_to_lch");
  Raster out(lab.height(), lab.width(), 3);
  auto src = lab.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double a = src[i + 1];
    const double b = src[i + 2];
    const double chroma = std::hypot(a, b);
    double hue = 0.0;
    if (chroma >= kAchromaticChroma) {
      hue = std::atan2(b, a) * 180.0 / std::numbers::pi;
      if (hue < 0.0) hue += 360.0;
      if (hue >= 360.0) hue -= 360.0;
    }
    dst[i] = src[i];
    dst[i + 1] = chroma;
    dst[i + 2] = hue;
  }
  return out;
}

Plane normalize_plane(const Plane& p) {
  Plane out(p.height(), p.width());
  auto src = p.data();
  if (src.empty()) return out;
  const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
  const double min = *lo;
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - min) / range;
  return out;
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * (static_cast<long>(n) - 1);
  long r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<long>(n)) r = period - r;
  return static_cast<std::size_t>(r);
}

Plane convolve_uniform(const Plane& p, int n) {
  if (n < 1 || n % 2 == 0) throw DomainError("convolve_uniform: kernel size must be odd and positive");
  if (n == 1) return p;
  const long r = n / 2;
  const std::size_t h = p.height();
  const std::size_t w = p.width();
  // Separable: horizontal window sums, then vertical, each over reflected indices.
  Plane rows(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double sum = 0.0;
      for (long d = -r; d <= r; ++d) sum += p.at(y, reflect_index(static_cast<long>(x) + d, w));
      rows.at(y, x) = sum;
    }
  }
  Plane out(h, w);
  const double norm = 1.0 / (static_cast<double>(n) * n);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double sum = 0.0;
      for (long d = -r; d <= r; ++d) sum += rows.at(reflect_index(static_cast<long>(y) + d, h), x);
      out.at(y, x) = sum * norm;
    }
  }
  return out;
}

// ---- k-means ---------------------------------------------------------------

namespace {

struct LloydRun {
  std::vector<double> centroids;
  std::vector<std::size_t> assignment;
  std::vector<double> trace;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

std::size_t nearest(double v, const std::vector<double>& centroids) {
  std::size_t best = 0;
  double best_d = std::abs(v - centroids[0]);
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = std::abs(v - centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<double> seed_plus_plus(std::span<const double> values, std::size_t k, std::mt19937_64& rng) {
  std::vector<double> centers;
  centers.reserve(k);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  centers.push_back(values[pick(rng)]);
  std::vector<double> d2(values.size());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    const double target = u(rng);
    double acc = 0.0;
    std::size_t chosen = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      chosen = i;
      if (acc >= target) break;
    }
    centers.push_back(values[chosen]);
  }
  return centers;
}

LloydRun lloyd(std::span<const double> values, std::vector<double> centroids, const KMeansOptions& opt) {
  const std::size_t k = centroids.size();
  LloydRun run;
  run.assignment.assign(values.size(), 0);
  std::vector<double> sums(k);
  std::vector<std::size_t> counts(k);
  for (int it = 0; it < opt.max_iterations; ++it) {
    std::sort(centroids.begin(), centroids.end());
    for (std::size_t i = 0; i < values.size(); ++i) run.assignment[i] = nearest(values[i], centroids);

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) ++counts[run.assignment[i]];
    // An empty cluster takes over the sample farthest from its centroid.
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (counts[run.assignment[i]] < 2) continue;
        const double d = std::abs(values[i] - centroids[run.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[run.assignment[far]];
      run.assignment[far] = j;
      counts[j] = 1;
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) sums[run.assignment[i]] += values[i];
    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double updated = sums[j] / static_cast<double>(counts[j]);
      shift = std::max(shift, std::abs(updated - centroids[j]));
      centroids[j] = updated;
    }
    double objective = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - centroids[run.assignment[i]];
      objective += d * d;
    }
    run.trace.push_back(objective);
    run.iterations = it + 1;
    if (shift < opt.tolerance) break;
  }
  run.centroids = std::move(centroids);
  run.objective = run.trace.empty() ? 0.0 : run.trace.back();
  return run;
}

}  // namespace

namespace {

// Centroids of the minimum-SSE split of the sorted values into k contiguous groups.
std::vector<double> optimal_partition_centroids(std::span<const double> values, std::size_t k) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + v[i];
    s2[i + 1] = s2[i] + v[i] * v[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {  // [a, b)
    const double m = static_cast<double>(b - a);
    const double sum = s1[b] - s1[a];
    return std::max(0.0, (s2[b] - s2[a]) - sum * sum / m);
  };
  const double inf = std::numeric_limits<double>::infinity();
  // cost[j][i]: best SSE of the first i values in j groups; cut[j][i]: start of the last group.
  std::vector<std::vector<double>> cost(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(n + 1, 0));
  cost[0][0] = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
    for (std::size_t i = j; i <= n; ++i)
      for (std::size_t a = j - 1; a < i; ++a) {
        if (cost[j - 1][a] == inf) continue;
        const double c = cost[j - 1][a] + sse(a, i);
        if (c < cost[j][i]) {
          cost[j][i] = c;
          cut[j][i] = a;
        }
      }
  std::vector<double> centroids(k);
  std::size_t end = n;
  for (std::size_t j = k; j >= 1; --j) {
    const std::size_t start = cut[j][end];
    centroids[j - 1] = (s1[end] - s1[start]) / static_cast<double>(end - start);
    end = start;
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans_1d(std::span<const double> values, std::size_t clusters, std::uint64_t seed,
                       const KMeansOptions& options) {
  if (values.empty()) throw DomainError("kmeans_1d: no values");
  if (clusters < 1) throw DomainError("kmeans_1d: clusters must be >= 1");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("kmeans_1d: non-finite value");

  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  KMeansResult result;
  result.requested_clusters = clusters;
  std::size_t k = clusters;
  if (k > distinct.size()) {
    k = distinct.size();
    result.reduced = true;
  }

  std::mt19937_64 rng(seed);
  LloydRun best;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    LloydRun run = lloyd(values, seed_plus_plus(values, k, rng), options);
    if (run.objective < best.objective) best = std::move(run);
  }
  if (values.size() <= options.exact_seed_limit) {
    LloydRun run = lloyd(values, optimal_partition_centroids(values, k), options);
    if (run.objective < best.objective) best = std::move(run);
  }

  // Centroids of a converged 1-D partition are already ordered; relabel defensively anyway.
  std::vector<std::size_t> order(k);
  for (std::size_t j = 0; j < k; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return best.centroids[a] < best.centroids[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t j = 0; j < k; ++j) rank[order[j]] = j;

  result.centroids.resize(k);
  for (std::size_t j = 0; j < k; ++j) result.centroids[j] = best.centroids[order[j]];
  result.assignment.resize(values.size());
  result.per_cluster_min.assign(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = rank[best.assignment[i]];
    result.assignment[i] = c;
    result.per_cluster_min[c] = std::min(result.per_cluster_min[c], values[i]);
  }
  result.objective = best.objective;
  result.iterations = best.iterations;
  result.objective_trace = std::move(best.trace);
  return result;
}

double kmeans_objective(std::span<const double> values, const KMeansResult& result) {
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - result.centroids[result.assignment[i]];
    total += d * d;
  }
  return total;
}

// ---- morphology ------------------------------------------------------------

StructuringElement StructuringElement::disk(int radius) {
  require(radius >= 0, "StructuringElement::disk: negative radius");
  StructuringElement se;
  se.radius = radius;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) se.offsets.emplace_back(dy, dx);
  return se;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  const long h = static_cast<long>(mask.height());
  const long w = static_cast<long>(mask.width());
  BinaryMask out(mask.height(), mask.width());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      bool hit = false;
      for (const auto& [dy, dx] : se.offsets) {
        const long yy = y - dy, xx = x - dx;
        if (yy >= 0 && yy < h && xx >= 0 && xx < w && mask.at(yy, xx)) {
          hit = true;
          break;
        }
      }
      out.set(y, x, hit);
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  const long h = static_cast<long>(mask.height());
  const long w = static_cast<long>(mask.width());
  BinaryMask out(mask.height(), mask.width());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      bool keep = true;
      for (const auto& [dy, dx] : se.offsets) {
        const long yy = y + dy, xx = x + dx;
        if (yy >= 0 && yy < h && xx >= 0 && xx < w && !mask.at(yy, xx)) {
          keep = false;
          break;
        }
      }
      out.set(y, x, keep);
    }
  }
  return out;
}

BinaryMask morph_close(const BinaryMask& mask, const StructuringElement& se) {
  return erode(dilate(mask, se), se);
}

BinaryMask morph_open(const BinaryMask& mask, const StructuringElement& se) {
  return dilate(erode(mask, se), se);
}

}  // namespace sonarfuse::imaging

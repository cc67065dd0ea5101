#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "sonarfuse/error.hpp"
#include "sonarfuse/noise.hpp"
#include "test_support.hpp"

namespace sonarfuse::noise {
namespace {

using sonarfuse::testing::random_raster;

double mean_of(const Raster& r) {
  return std::accumulate(r.data().begin(), r.data().end(), 0.0) / static_cast<double>(r.data().size());
}

bool in_unit_range(const Raster& r) {
  for (double v : r.data())
    if (v < 0.0 || v > 1.0) return false;
  return true;
}

// ---- multipath ------------------------------------------------------------------

TEST(Multipath, EmptyPathListIsIdentity) {
  const Raster img = random_raster(10, 8, 1, 1);
  EXPECT_EQ(apply_multipath(img, {}), img);
}

TEST(Multipath, SinglePathAddsHalfIntensityEcho) {
  Raster img(12, 5, 1, 0.0);
  img.at(2, 3) = 0.8;
  const Raster out = apply_multipath(img, {{{4, 0.5}}});
  std::size_t bright = 0;
  for (double v : out.data()) bright += v > 0.0;
  EXPECT_EQ(bright, 2u);
  EXPECT_DOUBLE_EQ(out.at(2, 3), 0.8);
  EXPECT_DOUBLE_EQ(out.at(6, 3), 0.4);
}

TEST(Multipath, TwoPathsSuperpose) {
  const Raster img = random_raster(20, 6, 1, 4);
  Raster scaled = img;
  for (double& v : scaled.data()) v *= 0.3;  // keep below the clip level
  const MultipathParams a{{{2, 0.4}}}, b{{{5, 0.25}}}, both{{{2, 0.4}, {5, 0.25}}};
  const Raster ra = apply_multipath(scaled, a), rb = apply_multipath(scaled, b), rab = apply_multipath(scaled, both);
  for (std::size_t i = 0; i < scaled.data().size(); ++i)
    EXPECT_NEAR(rab.data()[i], ra.data()[i] + rb.data()[i] - scaled.data()[i], 1e-15);
}

TEST(Multipath, DelayBeyondExtentIsDomainError) {
  EXPECT_THROW(apply_multipath(Raster(5, 5, 1), {{{5, 0.5}}}), DomainError);
  EXPECT_THROW(apply_multipath(Raster(5, 5, 1), {{{0, 0.5}}}), DomainError);
  EXPECT_THROW(apply_multipath(Raster(5, 5, 1), {{{1, 1.5}}}), DomainError);
}

TEST(Multipath, ColumnsAxisShiftsAlongWidth) {
  Raster img(3, 10, 1, 0.0);
  img.at(1, 1) = 1.0;
  const Raster out = apply_multipath(img, {{{3, 0.5}}}, RangeAxis::Columns);
  EXPECT_DOUBLE_EQ(out.at(1, 4), 0.5);
}

TEST(Multipath, AutocorrelationPeaksAtEachDelay) {
  Raster img(64, 64, 1, 0.0);
  for (std::size_t x = 4; x < 64; x += 9) img.at(5, x) = 1.0;
  const std::vector<int> delays{6, 13};
  const Raster out = apply_multipath(img, {{{6, 0.5}, {13, 0.3}}});
  auto autocorr = [&](int lag) {
    double s = 0.0;
    for (std::size_t y = 0; y + static_cast<std::size_t>(lag) < 64; ++y)
      for (std::size_t x = 0; x < 64; ++x) s += out.at(y, x) * out.at(y + static_cast<std::size_t>(lag), x);
    return s;
  };
  for (int d : delays) {
    EXPECT_GT(autocorr(d), autocorr(d - 1));
    EXPECT_GT(autocorr(d), autocorr(d + 1));
  }
}

// ---- backscatter ------------------------------------------------------------------

TEST(Backscatter, HugeLooksIsNearIdentity) {
  const Raster img = random_raster(16, 16, 1, 2);
  const Raster out = apply_backscatter(img, {1e6}, 3);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-2);
}

TEST(Backscatter, BlackStaysBlack) {
  const Raster out = apply_backscatter(Raster(8, 8, 3, 0.0), {4.0}, 1);
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Backscatter, PreservesMeanOverManyPixels) {
  const Raster out = apply_backscatter(Raster(320, 320, 1, 0.5), {4.0}, 12);
  const double m = mean_of(out);
  EXPECT_GE(m, 0.49);
  EXPECT_LE(m, 0.51);
}

TEST(Backscatter, SameMultiplierAcrossChannels) {
  const Raster out = apply_backscatter(Raster(4, 4, 3, 0.3), {4.0}, 9);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) {
      EXPECT_EQ(out.at(y, x, 0), out.at(y, x, 1));
      EXPECT_EQ(out.at(y, x, 0), out.at(y, x, 2));
    }
}

TEST(Backscatter, DeterministicPerSeedAndVariesAcrossSeeds) {
  const Raster img(16, 16, 1, 0.4);
  EXPECT_EQ(apply_backscatter(img, {4.0}, 5), apply_backscatter(img, {4.0}, 5));
  EXPECT_NE(apply_backscatter(img, {4.0}, 5), apply_backscatter(img, {4.0}, 6));
}

TEST(Backscatter, RejectsNonPositiveLooks) { EXPECT_THROW(apply_backscatter(Raster(2, 2, 1), {0.0}, 0), DomainError); }

// ---- reverberation -------------------------------------------------------------------

TEST(Reverb, KernelMatchesNormalizedGeometricTaps) {
  const auto k = reverb_kernel({0.5, 3, 1.0});
  ASSERT_EQ(k.size(), 3u);
  EXPECT_NEAR(k[0], 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(k[1], 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(k[2], 1.0 / 7.0, 1e-15);
}

TEST(Reverb, KernelSumsToOne) {
  for (double decay : {0.05, 0.3, 0.6, 0.95})
    for (int length : {1, 2, 5, 17, 64}) {
      const auto k = reverb_kernel({decay, length, 0.5});
      EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(Reverb, ZeroMixIsIdentity) {
  const Raster img = random_raster(9, 9, 3, 5);
  EXPECT_EQ(apply_reverberation(img, {0.6, 5, 0.0}), img);
}

TEST(Reverb, ConstantImageUnchanged) {
  for (double c : {0.0, 0.2, 0.77, 1.0}) {
    const Raster out = apply_reverberation(Raster(15, 7, 1, c), {0.7, 6, 0.8});
    for (double v : out.data()) EXPECT_NEAR(v, c, 1e-9);
  }
}

TEST(Reverb, BrightPixelTrailsDownRange) {
  Raster img(10, 3, 1, 0.0);
  img.at(2, 1) = 0.7;
  const Raster out = apply_reverberation(img, {0.5, 3, 1.0});
  EXPECT_NEAR(out.at(2, 1), 0.7 * 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(out.at(3, 1), 0.7 * 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(out.at(4, 1), 0.7 * 1.0 / 7.0, 1e-15);
  EXPECT_EQ(out.at(1, 1), 0.0);
  EXPECT_EQ(out.at(5, 1), 0.0);
}

TEST(Reverb, RejectsInvalidParameters) {
  EXPECT_THROW(reverb_kernel({1.0, 3, 0.5}), DomainError);
  EXPECT_THROW(reverb_kernel({0.5, 0, 0.5}), DomainError);
  EXPECT_THROW(reverb_kernel({0.5, 3, 1.5}), DomainError);
}

// ---- profiles ---------------------------------------------------------------------------

TEST(Profile, AllOperatorsStayInUnitRange) {
  const Raster img = random_raster(32, 32, 3, 8);
  for (const char* name : {"none", "light", "default", "heavy"}) {
    const Raster out = apply_profile(img, named_profile(name), 4);
    EXPECT_TRUE(in_unit_range(out)) << name;
  }
}

TEST(Profile, NoneIsIdentity) {
  const Raster img = random_raster(8, 8, 1, 3);
  EXPECT_TRUE(named_profile("none").is_identity());
  EXPECT_EQ(apply_profile(img, named_profile("none"), 1), img);
}

TEST(Profile, UnknownNameIsDomainError) { EXPECT_THROW(named_profile("loud"), DomainError); }

TEST(Profile, JsonRoundTrip) {
  for (const char* name : {"none", "light", "default", "heavy"}) {
    const NoiseProfile p = named_profile(name);
    EXPECT_EQ(to_json(profile_from_json(to_json(p))), to_json(p));
  }
}

TEST(Profile, ParsesCommandLineForms) {
  const MultipathParams m = parse_multipath("3:0.25,8:0.1");
  ASSERT_EQ(m.paths.size(), 2u);
  EXPECT_EQ(m.paths[1].delay, 8);
  EXPECT_DOUBLE_EQ(m.paths[1].attenuation, 0.1);
  const ReverbParams r = parse_reverb("0.5,4,0.25");
  EXPECT_DOUBLE_EQ(r.decay, 0.5);
  EXPECT_EQ(r.length, 4);
  EXPECT_DOUBLE_EQ(r.mix, 0.25);
  EXPECT_THROW(parse_multipath("3-0.2"), DomainError);
  EXPECT_THROW(parse_reverb("0.5,4"), DomainError);
}

TEST(Profile, HeavierProfilesDegradeMore) {
  Raster img(64, 64, 1, 0.45);
  for (std::size_t y = 20; y < 30; ++y)
    for (std::size_t x = 20; x < 40; ++x) img.at(y, x) = 0.9;
  auto err = [&](const char* name) {
    const Raster out = apply_profile(img, named_profile(name), 21);
    double s = 0.0;
    for (std::size_t i = 0; i < img.data().size(); ++i) s += std::pow(out.data()[i] - img.data()[i], 2);
    return s;
  };
  EXPECT_LT(err("light"), err("default"));
  EXPECT_LT(err("default"), err("heavy"));
}

}  // namespace
}  // namespace sonarfuse::noise

#include "sonarfuse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sonarfuse/error.hpp"

namespace sonarfuse::noise {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

std::size_t range_extent(const Raster& img, RangeAxis axis) {
  return axis == RangeAxis::Rows ? img.height() : img.width();
}

// Value at range offset `back` behind (y, x); nullopt when it falls before the first bin.
std::optional<double> behind(const Raster& img, RangeAxis axis, std::size_t y, std::size_t x, std::size_t c,
                             std::size_t back) {
  if (axis == RangeAxis::Rows) {
    if (y < back) return std::nullopt;
    return img.at(y - back, x, c);
  }
  if (x < back) return std::nullopt;
  return img.at(y, x - back, c);
}

std::string axis_name(RangeAxis axis) { return axis == RangeAxis::Rows ? "rows" : "columns"; }

}  // namespace

void validate(const MultipathParams& p) {
  for (const auto& path : p.paths) {
    require(path.delay >= 1, "multipath: delay must be >= 1");
    require(path.attenuation >= 0.0 && path.attenuation <= 1.0, "multipath: attenuation must lie in [0,1]");
  }
}

void validate(const BackscatterParams& p) {
  require(std::isfinite(p.looks) && p.looks > 0.0, "backscatter: looks must be > 0");
}

void validate(const ReverbParams& p) {
  require(p.decay > 0.0 && p.decay < 1.0, "reverberation: decay must lie in (0,1)");
  require(p.length >= 1, "reverberation: length must be >= 1");
  require(p.mix >= 0.0 && p.mix <= 1.0, "reverberation: mix must lie in [0,1]");
}

Raster apply_multipath(const Raster& img, const MultipathParams& p, RangeAxis axis) {
  validate(p);
  const std::size_t extent = range_extent(img, axis);
  for (const auto& path : p.paths)
    require(static_cast<std::size_t>(path.delay) < extent, "multipath: delay exceeds image extent");
  Raster out = img;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < img.channels(); ++c) {
        double v = img.at(y, x, c);
        for (const auto& path : p.paths)
          if (auto echo = behind(img, axis, y, x, c, static_cast<std::size_t>(path.delay)))
            v += path.attenuation * *echo;
        out.at(y, x, c) = clip01(v);
      }
  return out;
}

Raster apply_backscatter(const Raster& img, const BackscatterParams& p, std::uint64_t seed) {
  validate(p);
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> speckle(p.looks, 1.0 / p.looks);
  Raster out = img;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double s = speckle(rng);
      for (std::size_t c = 0; c < img.channels(); ++c) out.at(y, x, c) = clip01(img.at(y, x, c) * s);
    }
  return out;
}

std::vector<double> reverb_kernel(const ReverbParams& p) {
  validate(p);
  std::vector<double> taps(static_cast<std::size_t>(p.length));
  double weight = 1.0;
  double total = 0.0;
  for (auto& t : taps) {
    t = weight;
    total += weight;
    weight *= p.decay;
  }
  for (auto& t : taps) t /= total;
  return taps;
}

Raster apply_reverberation(const Raster& img, const ReverbParams& p, RangeAxis axis) {
  const std::vector<double> taps = reverb_kernel(p);
  Raster out = img;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < img.channels(); ++c) {
        double wet = 0.0;
        for (std::size_t t = 0; t < taps.size(); ++t) {
          const auto sample = behind(img, axis, y, x, c, t);
          const double first = axis == RangeAxis::Rows ? img.at(0, x, c) : img.at(y, 0, c);
          wet += taps[t] * sample.value_or(first);
        }
        out.at(y, x, c) = clip01((1.0 - p.mix) * img.at(y, x, c) + p.mix * wet);
      }
  return out;
}

NoiseProfile named_profile(const std::string& name) {
  NoiseProfile profile;
  profile.name = name;
  if (name == "none") return profile;
  if (name == "light") {
    profile.multipath = MultipathParams{{{4, 0.1}}};
    profile.reverb = ReverbParams{0.5, 3, 0.2};
    profile.backscatter = BackscatterParams{16.0};
  } else if (name == "default") {
    profile.multipath = MultipathParams{{{4, 0.2}}};
    profile.reverb = ReverbParams{0.6, 5, 0.3};
    profile.backscatter = BackscatterParams{4.0};
  } else if (name == "heavy") {
    profile.multipath = MultipathParams{{{3, 0.3}, {7, 0.15}}};
    profile.reverb = ReverbParams{0.7, 7, 0.5};
    profile.backscatter = BackscatterParams{1.5};
  } else {
    throw DomainError("unknown noise profile '" + name + "'");
  }
  return profile;
}

Raster apply_profile(const Raster& img, const NoiseProfile& profile, std::uint64_t seed) {
  Raster out = img;
  if (profile.multipath) out = apply_multipath(out, *profile.multipath, profile.axis);
  if (profile.reverb) out = apply_reverberation(out, *profile.reverb, profile.axis);
  if (profile.backscatter) out = apply_backscatter(out, *profile.backscatter, seed);
  return out;
}

MultipathParams parse_multipath(const std::string& text) {
  MultipathParams params;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    require(colon != std::string::npos, "multipath: expected delay:attenuation, got '" + item + "'");
    try {
      params.paths.push_back({std::stoi(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw DomainError("multipath: cannot parse '" + item + "'");
    }
  }
  validate(params);
  return params;
}

ReverbParams parse_reverb(const std::string& text) {
  std::stringstream ss(text);
  std::string decay, length, mix;
  require(std::getline(ss, decay, ',') && std::getline(ss, length, ',') && std::getline(ss, mix, ','),
          "reverberation: expected decay,length,mix");
  ReverbParams p;
  try {
    p = {std::stod(decay), std::stoi(length), std::stod(mix)};
  } catch (const std::exception&) {
    throw DomainError("reverberation: cannot parse '" + text + "'");
  }
  validate(p);
  return p;
}

nlohmann::json to_json(const NoiseProfile& profile) {
  nlohmann::json j;
  j["name"] = profile.name;
  j["rangeAxis"] = axis_name(profile.axis);
  if (profile.multipath) {
    auto paths = nlohmann::json::array();
    for (const auto& p : profile.multipath->paths) paths.push_back({{"delay", p.delay}, {"attenuation", p.attenuation}});
    j["multipath"] = paths;
  } else {
    j["multipath"] = nullptr;
  }
  if (profile.reverb)
    j["reverberation"] = {{"decay", profile.reverb->decay}, {"length", profile.reverb->length}, {"mix", profile.reverb->mix}};
  else
    j["reverberation"] = nullptr;
  if (profile.backscatter)
    j["backscatter"] = {{"looks", profile.backscatter->looks}};
  else
    j["backscatter"] = nullptr;
  return j;
}

NoiseProfile profile_from_json(const nlohmann::json& j) {
  NoiseProfile profile;
  try {
    profile.name = j.value("name", std::string("custom"));
    profile.axis = j.value("rangeAxis", std::string("rows")) == "columns" ? RangeAxis::Columns : RangeAxis::Rows;
    if (j.contains("multipath") && !j["multipath"].is_null()) {
      MultipathParams mp;
      for (const auto& p : j["multipath"]) mp.paths.push_back({p.at("delay").get<int>(), p.at("attenuation").get<double>()});
      validate(mp);
      profile.multipath = mp;
    }
    if (j.contains("reverberation") && !j["reverberation"].is_null()) {
      const auto& r = j["reverberation"];
      ReverbParams rp{r.at("decay").get<double>(), r.at("length").get<int>(), r.at("mix").get<double>()};
      validate(rp);
      profile.reverb = rp;
    }
    if (j.contains("backscatter") && !j["backscatter"].is_null()) {
      BackscatterParams bp{j["backscatter"].at("looks").get<double>()};
      validate(bp);
      profile.backscatter = bp;
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("noise profile: ") + e.what());
  }
  return profile;
}

}  // namespace sonarfuse::noise

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arcscan/image.hpp"
#include "arcscan/parallel.hpp"
#include "arcscan/rng.hpp"

namespace arcscan {

// Synthetic surrogate for the simulated ARS dataset. The generator is
// qualitative: a smooth high-intensity lobe over the pole columns, high
// frequency texture near the equatorial columns, per-image speckle, and
// class statistics graded monotonically with the deficiency level.
//
// The class signal is split across channels so that sampling strategy
// matters. The mean intensity rises with the deficiency level but is
// confounded by a per-image gain. Speckle depth rises with the level on
// the pole lobe and falls on the equator texture, wobbled by one shared
// per-image factor; a single arc therefore reads the speckle through that
// wobble, while arc sets spanning both bands can cancel it. The middle
// band carries only class-blind clutter.
struct GenConfig {
  std::uint64_t seed = 1;
  int images_per_class = 160;
  double pole_peak = 100.0;          // lobe intensity at alpha = 90
  double equator_texture_freq = 18;  // cycles across the 180-pixel span
  double class_effect = 0.35;        // relative mean lift, class 0 -> 4
  double background_floor = 0.2;

  double pole_sigma_deg = 8.0;
  double equator_sigma_deg = 30.0;
  double equator_amp = 25.0;
  double mid_amp = 8.0;
  double speckle_base = 0.16;           // pole speckle depth at class 0
  double speckle_class_gain = 1.1;      // pole speckle grading, class 0 -> 4
  double equator_speckle_base = 0.32;   // equator speckle depth at class 0
  double equator_speckle_gain = -0.45;  // equator grading (opposite sign)
  double speckle_jitter = 0.12;         // shared per-image speckle wobble
  double gain_jitter = 0.045;           // per-image global gain sigma

  void validate() const {
    if (images_per_class < 2)
      throw std::invalid_argument("images_per_class must be >= 2");
    if (pole_peak <= 0 || equator_texture_freq <= 0 || equator_amp <= 0 ||
        mid_amp <= 0 || pole_sigma_deg <= 0 || equator_sigma_deg <= 0 ||
        speckle_base <= 0 || equator_speckle_base <= 0)
      throw std::invalid_argument("generator scale parameters must be > 0");
    if (background_floor < 0)
      throw std::invalid_argument("background_floor must be >= 0");
    if (speckle_jitter < 0 || gain_jitter < 0)
      throw std::invalid_argument("jitter parameters must be >= 0");
    if (1.0 + speckle_class_gain <= 0 || 1.0 + equator_speckle_gain <= 0)
      throw std::invalid_argument("speckle grading must keep depths positive");
  }
};

namespace detail {

inline double level_fraction(DeficiencyClass c) {
  return kDeficiencyPercent[class_index(c)] / 60.0;
}

}  // namespace detail

// Generates one labeled image. Image index n fixes the RNG stream, so
// parallel and serial generation agree bit-exactly.
inline ArsImage generate_image(const GenConfig& cfg, int n) {
  const int q = n / cfg.images_per_class;
  const DeficiencyClass cls = class_from_index(q);
  const double lf = detail::level_fraction(cls);
  const double s_mean = 1.0 + cfg.class_effect * lf;

  auto gen = rng::engine(rng::derive(cfg.seed, rng::kDatagen, static_cast<std::uint64_t>(n)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double gain = std::max(0.5, 1.0 + cfg.gain_jitter * normal(gen));
  const double wobble = std::max(0.3, 1.0 + cfg.speckle_jitter * normal(gen));
  const double spk_pole = cfg.speckle_base * (1.0 + cfg.speckle_class_gain * lf) * wobble;
  const double spk_eq =
      cfg.equator_speckle_base * (1.0 + cfg.equator_speckle_gain * lf) * wobble;
  const double psi = 0.7 + 0.6 * unit(gen);  // per-image mid-band level, class blind
  const double phase_r = 2.0 * std::numbers::pi * unit(gen);
  const double phase_c = 2.0 * std::numbers::pi * unit(gen);

  // column profiles
  double pole[kImageSize], equ[kImageSize], mid[kImageSize], osc_c[kImageSize];
  const double f = cfg.equator_texture_freq;
  for (int c = 0; c < kImageSize; ++c) {
    const double dp = (c - 89.5) / cfg.pole_sigma_deg;
    pole[c] = std::exp(-0.5 * dp * dp);
    const double de = std::min(c, kImageSize - 1 - c) / cfg.equator_sigma_deg;
    equ[c] = std::exp(-0.5 * de * de);
    const double dm1 = (c - 64.5) / 10.0, dm2 = (c - 114.5) / 10.0;
    mid[c] = std::exp(-0.5 * dm1 * dm1) + std::exp(-0.5 * dm2 * dm2);
    osc_c[c] = std::sin(2.0 * std::numbers::pi * f * c / kImageSize + phase_c);
  }

  std::vector<float> px(kPixelCount);
  for (int r = 0; r < kImageSize; ++r) {
    const double osc_r = std::sin(2.0 * std::numbers::pi * f * r / kImageSize + phase_r);
    const double rowmod = 1.0 + 0.1 * std::cos(2.0 * std::numbers::pi * r / kImageSize);
    for (int c = 0; c < kImageSize; ++c) {
      const double z = normal(gen);
      const double eta = 0.5 + unit(gen);
      const double pole_term = cfg.pole_peak * pole[c] * rowmod *
                               std::max(0.05, 1.0 + spk_pole * z);
      const double eq_term = cfg.equator_amp * equ[c] * (1.0 + 0.8 * osc_r * osc_c[c]) *
                             std::max(0.05, 1.0 + spk_eq * z);
      const double v = gain * s_mean *
                           (pole_term + eq_term + cfg.mid_amp * mid[c] * psi * eta) +
                       cfg.background_floor;
      px[r * kImageSize + c] = static_cast<float>(v);
    }
  }
  return ArsImage(std::move(px), cls);
}

inline std::vector<ArsImage> generate_dataset(const GenConfig& cfg, int threads = 1) {
  cfg.validate();
  const int n = kClassCount * cfg.images_per_class;
  std::vector<ArsImage> images(n);
  parallel_for(n, threads, [&](int i) { images[i] = generate_image(cfg, i); });
  return images;
}

// Additive zero-mean Gaussian noise calibrated against this image's own
// mean squared intensity. Output is not clipped; negatives are expected.
inline ArsImage add_gaussian_noise(const ArsImage& image, double snr_db,
                                   std::uint64_t rng_seed) {
  if (!std::isfinite(snr_db))
    throw std::invalid_argument("add_gaussian_noise: snr_db must be finite");
  double p_signal = 0.0;
  for (float v : image.pixels())
    p_signal += static_cast<double>(v) * static_cast<double>(v);
  p_signal /= kPixelCount;
  const double sigma = std::sqrt(p_signal / std::pow(10.0, snr_db / 10.0));

  auto gen = rng::engine(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> px(kPixelCount);
  const auto src = image.pixels();
  for (int i = 0; i < kPixelCount; ++i)
    px[i] = static_cast<float>(src[i] + sigma * normal(gen));
  return ArsImage(std::move(px), image.label());
}

// Deterministic corrupted-position selection for a salt-and-pepper pass:
// round(fraction * 32400) distinct positions, uniform without replacement,
// in selection order.
inline std::vector<int> salt_pepper_positions(double fraction, std::uint64_t rng_seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("salt_pepper fraction must be in [0,1)");
  const auto n = static_cast<int>(std::llround(fraction * kPixelCount));
  std::vector<int> idx(kPixelCount);
  for (int i = 0; i < kPixelCount; ++i) idx[i] = i;
  auto gen = rng::engine(rng_seed);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, kPixelCount - 1);
    std::swap(idx[i], idx[pick(gen)]);
  }
  idx.resize(n);
  return idx;
}

// The first ceil(n/2) selected positions become salt (the image maximum),
// the rest pepper (the minimum). Extremes are per-image values: ARS
// intensities are unbounded reals, not 8-bit counts.
inline ArsImage add_salt_pepper(const ArsImage& image, double fraction,
                                std::uint64_t rng_seed) {
  const std::vector<int> pos = salt_pepper_positions(fraction, rng_seed);
  std::vector<float> px(image.pixels().begin(), image.pixels().end());
  if (!pos.empty()) {
    const auto [mn_it, mx_it] = std::minmax_element(px.begin(), px.end());
    const float mn = *mn_it, mx = *mx_it;
    const std::size_t salt = (pos.size() + 1) / 2;
    for (std::size_t i = 0; i < pos.size(); ++i)
      px[pos[i]] = i < salt ? mx : mn;
  }
  return ArsImage(std::move(px), image.label());
}

// Noise condition of an experiment. Gaussian is applied before
// salt-and-pepper when both are present.
struct NoiseSpec {
  std::optional<double> gaussian_snr_db;
  std::optional<double> salt_pepper_fraction;

  bool any() const { return gaussian_snr_db || salt_pepper_fraction; }

  std::string id() const {
    if (!any()) return "none";
    std::ostringstream os;
    if (gaussian_snr_db) os << "gaussian:" << *gaussian_snr_db;
    if (salt_pepper_fraction) {
      if (gaussian_snr_db) os << '+';
      os << "saltpepper:" << *salt_pepper_fraction;
    }
    return os.str();
  }

  static NoiseSpec parse(const std::string& text) {
    NoiseSpec spec;
    if (text.empty() || text == "none" || text == "clean") return spec;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t plus = text.find('+', start);
      const std::string tok = text.substr(
          start, plus == std::string::npos ? std::string::npos : plus - start);
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("bad noise token: " + tok);
      const std::string kind = tok.substr(0, colon);
      const double value = std::stod(tok.substr(colon + 1));
      if (kind == "gaussian")
        spec.gaussian_snr_db = value;
      else if (kind == "saltpepper")
        spec.salt_pepper_fraction = value;
      else
        throw std::invalid_argument("unknown noise kind: " + kind);
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    return spec;
  }
};

inline std::vector<ArsImage> apply_noise(std::span<const ArsImage> images,
                                         const NoiseSpec& spec,
                                         std::uint64_t seed, int threads = 1) {
  std::vector<ArsImage> out(images.size());
  parallel_for(static_cast<int>(images.size()), threads, [&](int i) {
    ArsImage img = images[i];
    if (spec.gaussian_snr_db)
      img = add_gaussian_noise(img, *spec.gaussian_snr_db,
                               rng::derive(seed, static_cast<std::uint64_t>(i), 1));
    if (spec.salt_pepper_fraction)
      img = add_salt_pepper(img, *spec.salt_pepper_fraction,
                            rng::derive(seed, static_cast<std::uint64_t>(i), 2));
    out[i] = std::move(img);
  });
  return out;
}

}  // namespace arcscan

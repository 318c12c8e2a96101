#include <catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <set>

#include "arcscan/datagen.hpp"
#include "arcscan/features.hpp"

using namespace arcscan;

namespace {

// one full-size surrogate dataset shared across the tests in this file
const std::vector<ArsImage>& surrogate() {
  static const std::vector<ArsImage> data = [] {
    GenConfig cfg;
    cfg.seed = 7;
    return generate_dataset(cfg, 2);
  }();
  return data;
}

double image_mean(const ArsImage& img) {
  double s = 0;
  for (float v : img.pixels()) s += v;
  return s / kPixelCount;
}

double column_band_mean(const ArsImage& img, int c0, int c1) {
  double s = 0;
  int n = 0;
  for (int r = 0; r < kImageSize; ++r)
    for (int c = c0; c <= c1; ++c) {
      s += img(r, c);
      ++n;
    }
  return s / n;
}

}  // namespace

TEST_CASE("generation is deterministic and parallel-agnostic") {
  GenConfig cfg;
  cfg.seed = 7;
  cfg.images_per_class = 3;
  const auto a = generate_dataset(cfg, 1);
  const auto b = generate_dataset(cfg, 4);
  REQUIRE(a.size() == 15);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label() == b[i].label());
    REQUIRE(std::equal(a[i].pixels().begin(), a[i].pixels().end(),
                       b[i].pixels().begin()));
  }
}

TEST_CASE("dataset has 5 * images_per_class labeled images, clean and non-negative") {
  const auto& data = surrogate();
  REQUIRE(data.size() == 800);
  int counts[kClassCount] = {};
  for (const ArsImage& img : data) {
    REQUIRE(img.label().has_value());
    ++counts[class_index(*img.label())];
    for (float v : img.pixels()) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v >= 0.0f);
    }
  }
  for (int c = 0; c < kClassCount; ++c) CHECK(counts[c] == 160);
}

TEST_CASE("class-0 vs class-4 mean intensity gap tracks class_effect") {
  const auto& data = surrogate();
  double m0 = 0, m4 = 0;
  for (int i = 0; i < 160; ++i) m0 += image_mean(data[i]);
  for (int i = 640; i < 800; ++i) m4 += image_mean(data[i]);
  m0 /= 160;
  m4 /= 160;
  const double measured = m4 / m0 - 1.0;
  CHECK(std::abs(measured - GenConfig{}.class_effect) <= 0.01);
}

TEST_CASE("pole columns outshine equator columns in every clean image") {
  for (const ArsImage& img : surrogate())
    REQUIRE(column_band_mean(img, 85, 94) > column_band_mean(img, 0, 9));
}

TEST_CASE("per-image mean rank-correlates positively with class index") {
  const auto& data = surrogate();
  const int n = static_cast<int>(data.size());
  std::vector<double> means(n);
  for (int i = 0; i < n; ++i) means[i] = image_mean(data[i]);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return means[a] < means[b]; });
  // Spearman rho between mean-rank and class index
  std::vector<double> rank(n);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;
  double mr = (n - 1) / 2.0, mc = 0;
  for (int i = 0; i < n; ++i) mc += class_index(*data[i].label());
  mc /= n;
  double cov = 0, vr = 0, vc = 0;
  for (int i = 0; i < n; ++i) {
    const double dr = rank[i] - mr;
    const double dc = class_index(*data[i].label()) - mc;
    cov += dr * dc;
    vr += dr * dr;
    vc += dc * dc;
  }
  const double rho = cov / std::sqrt(vr * vc);
  INFO("spearman rho = " << rho);
  CHECK(rho > 0.0);
}

TEST_CASE("generator rejects invalid configs") {
  GenConfig cfg;
  cfg.images_per_class = 1;
  CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
  GenConfig cfg2;
  cfg2.pole_peak = 0;
  CHECK_THROWS_AS(generate_dataset(cfg2), std::invalid_argument);
}

TEST_CASE("gaussian noise at snr 300 dB is the identity in float") {
  const ArsImage& img = surrogate()[0];
  const ArsImage noisy = add_gaussian_noise(img, 300.0, 42);
  REQUIRE(std::equal(noisy.pixels().begin(), noisy.pixels().end(),
                     img.pixels().begin()));
}

TEST_CASE("gaussian noise hits the requested snr within half a dB") {
  for (double target : {20.0, 30.0}) {
    const ArsImage& img = surrogate()[3];
    const ArsImage noisy = add_gaussian_noise(img, target, 99);
    double p_signal = 0, p_noise = 0;
    for (int i = 0; i < kPixelCount; ++i) {
      p_signal += static_cast<double>(img.pixels()[i]) * img.pixels()[i];
      const double d = static_cast<double>(noisy.pixels()[i]) - img.pixels()[i];
      p_noise += d * d;
    }
    const double measured = 10.0 * std::log10(p_signal / p_noise);
    INFO("target " << target << " measured " << measured);
    CHECK(std::abs(measured - target) <= 0.5);
  }
}

TEST_CASE("gaussian noise is seed-deterministic and rejects non-finite snr") {
  const ArsImage& img = surrogate()[5];
  const ArsImage a = add_gaussian_noise(img, 20.0, 77);
  const ArsImage b = add_gaussian_noise(img, 20.0, 77);
  REQUIRE(std::equal(a.pixels().begin(), a.pixels().end(), b.pixels().begin()));
  CHECK_THROWS_AS(add_gaussian_noise(img, std::nan(""), 1), std::invalid_argument);
}

TEST_CASE("salt and pepper at fraction 0 is the identity") {
  const ArsImage& img = surrogate()[10];
  const ArsImage same = add_salt_pepper(img, 0.0, 5);
  REQUIRE(std::equal(same.pixels().begin(), same.pixels().end(),
                     img.pixels().begin()));
}

TEST_CASE("salt and pepper corrupts exactly the selected positions") {
  const ArsImage& img = surrogate()[11];
  const std::uint64_t seed = 31;
  const std::vector<int> pos = salt_pepper_positions(0.1, seed);
  REQUIRE(pos.size() == 3240);
  CHECK(std::set<int>(pos.begin(), pos.end()).size() == 3240);

  const ArsImage noisy = add_salt_pepper(img, 0.1, seed);
  const float mn = *std::min_element(img.pixels().begin(), img.pixels().end());
  const float mx = *std::max_element(img.pixels().begin(), img.pixels().end());
  std::set<int> selected(pos.begin(), pos.end());
  int salt = 0, pepper = 0;
  for (int p = 0; p < kPixelCount; ++p) {
    if (selected.count(p)) {
      REQUIRE((noisy.pixels()[p] == mn || noisy.pixels()[p] == mx));
      (noisy.pixels()[p] == mx ? salt : pepper)++;
    } else {
      REQUIRE(noisy.pixels()[p] == img.pixels()[p]);
    }
  }
  CHECK(salt == 1620);
  CHECK(pepper == 1620);
}

TEST_CASE("salt and pepper changes exactly round(f*32400) pixels on a safe image") {
  // unique extreme pixels at two fixed positions, seed chosen so neither
  // is among the selected positions
  std::vector<float> px(kPixelCount);
  for (int i = 0; i < kPixelCount; ++i) px[i] = 20.0f + (i % 997) * 0.01f;
  px[100] = 10.0f;   // unique minimum
  px[200] = 100.0f;  // unique maximum
  const ArsImage img(std::move(px), DeficiencyClass::d0);
  const std::uint64_t seed = 31;
  const float mn = *std::min_element(img.pixels().begin(), img.pixels().end());
  const float mx = *std::max_element(img.pixels().begin(), img.pixels().end());
  const std::vector<int> pos = salt_pepper_positions(0.1, seed);
  for (int p : pos) {
    REQUIRE(img.pixels()[p] != mn);
    REQUIRE(img.pixels()[p] != mx);
  }
  const ArsImage noisy = add_salt_pepper(img, 0.1, seed);
  int differing = 0;
  for (int p = 0; p < kPixelCount; ++p)
    if (noisy.pixels()[p] != img.pixels()[p]) ++differing;
  CHECK(differing == 3240);
}

TEST_CASE("salt and pepper rejects out-of-range fractions") {
  const ArsImage& img = surrogate()[0];
  CHECK_THROWS_AS(add_salt_pepper(img, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(add_salt_pepper(img, -0.1, 1), std::invalid_argument);
}

TEST_CASE("apply_noise composes gaussian then salt-and-pepper deterministically") {
  const std::span<const ArsImage> base(surrogate().data(), 4);
  NoiseSpec spec;
  spec.gaussian_snr_db = 20;
  spec.salt_pepper_fraction = 0.1;
  const auto a = apply_noise(base, spec, 123, 1);
  const auto b = apply_noise(base, spec, 123, 3);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(std::equal(a[i].pixels().begin(), a[i].pixels().end(),
                       b[i].pixels().begin()));
  // salt value equals the max of the gaussian-noisy image, not the clean one
  const ArsImage g = add_gaussian_noise(base[0], 20, rng::derive(123, 0, 1));
  const float mx = *std::max_element(g.pixels().begin(), g.pixels().end());
  const float got_mx = *std::max_element(a[0].pixels().begin(), a[0].pixels().end());
  CHECK(got_mx == mx);
}

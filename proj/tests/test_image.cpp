#include <catch_amalgamated.hpp>
#include <random>

#include "arcscan/image.hpp"

using namespace arcscan;

namespace {

ArsImage random_image(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(0.0f, 100.0f);
  std::vector<float> px(kPixelCount);
  for (auto& v : px) v = u(gen);
  return ArsImage(std::move(px), DeficiencyClass::d0);
}

}  // namespace

TEST_CASE("arc_to_angles maps columns to alpha and beta halves") {
  const ArcAngles a20 = arc_to_angles(20);
  CHECK(a20.alpha_deg == 20.0);
  CHECK(a20.beta_begin_deg == 0.0);
  CHECK(a20.beta_end_deg == 180.0);

  const ArcAngles a0 = arc_to_angles(0);  // equatorial arc
  CHECK(a0.alpha_deg == 0.0);
  CHECK(a0.beta_end_deg == 180.0);

  // second-arc half of latitude 20
  const ArcAngles a160 = arc_to_angles(160);
  CHECK(a160.alpha_deg == 160.0);
  CHECK(a160.beta_begin_deg == 0.0);
  CHECK(a160.beta_end_deg == -180.0);
  CHECK(paired_arc_column(160) == 20);
  CHECK(paired_arc_column(20) == 160);

  CHECK_THROWS_AS(arc_to_angles(-1), std::out_of_range);
  CHECK_THROWS_AS(arc_to_angles(180), std::out_of_range);
}

TEST_CASE("arc_to_angles is a bijection between columns and (alpha, beta-half)") {
  std::set<std::pair<double, double>> seen;
  for (int c = 0; c < kImageSize; ++c) {
    const ArcAngles a = arc_to_angles(c);
    seen.insert({a.alpha_deg, a.beta_end_deg});
  }
  CHECK(seen.size() == kImageSize);
}

TEST_CASE("ArcSet canonicalizes and validates") {
  const ArcSet a({17, 5, 17, 90});
  CHECK(a.indices() == std::vector<int>{5, 17, 90});
  CHECK_THROWS_AS(ArcSet({0, 200}), std::out_of_range);
  CHECK_THROWS_AS(ArcSet({-3}), std::out_of_range);
}

TEST_CASE("extract_arcs single column equals the column") {
  const ArsImage img = random_image(7);
  const std::vector<float> got = extract_arcs(img, ArcSet({42}));
  REQUIRE(got.size() == 180);
  for (int r = 0; r < kImageSize; ++r) CHECK(got[r] == img(r, 42));
}

TEST_CASE("extract_arcs of a constant image is constant") {
  ArsImage img(std::vector<float>(kPixelCount, 3.0f), DeficiencyClass::d10);
  const std::vector<float> got = extract_arcs(img, ArcSet({1, 50, 100, 150}));
  REQUIRE(got.size() == 720);
  for (float v : got) CHECK(v == 3.0f);
}

TEST_CASE("extract_arcs matches a per-pixel reference loop") {
  const ArsImage img = random_image(99);
  const ArcSet arcs({5, 17});
  const std::vector<float> got = extract_arcs(img, arcs);
  std::vector<float> want;
  for (int c : {5, 17})
    for (int r = 0; r < kImageSize; ++r) want.push_back(img(r, c));
  CHECK(got == want);
}

TEST_CASE("extract_arcs is invariant to construction order of the arc set") {
  const ArsImage img = random_image(123);
  const std::vector<float> a = extract_arcs(img, ArcSet({3, 90, 12}));
  const std::vector<float> b = extract_arcs(img, ArcSet({90, 12, 3, 12}));
  CHECK(a == b);
}

TEST_CASE("apply_mask with full mask flattens row-major") {
  const ArsImage img = random_image(5);
  const std::vector<float> got = apply_mask(img, PointMask::full());
  REQUIRE(got.size() == static_cast<std::size_t>(kPixelCount));
  for (int p = 0; p < kPixelCount; ++p) CHECK(got[p] == img.pixels()[p]);
}

TEST_CASE("apply_mask with one point yields one value") {
  const ArsImage img = random_image(6);
  const int pt = 37 * kImageSize + 101;
  const std::vector<float> got = apply_mask(img, PointMask::from_points(std::vector<int>{pt}));
  REQUIRE(got.size() == 1);
  CHECK(got[0] == img(37, 101));
}

TEST_CASE("apply_mask matches a reference loop on a random sparse mask") {
  const ArsImage img = random_image(11);
  std::mt19937_64 gen(12);
  std::vector<int> pts;
  std::bernoulli_distribution keep(0.01);
  for (int p = 0; p < kPixelCount; ++p)
    if (keep(gen)) pts.push_back(p);
  const PointMask mask = PointMask::from_points(pts);
  const std::vector<float> got = apply_mask(img, mask);
  std::vector<float> want;
  for (int p = 0; p < kPixelCount; ++p)
    if (mask.at(p)) want.push_back(img.pixels()[p]);
  CHECK(got == want);
}

TEST_CASE("apply_mask rejects empty masks") {
  const ArsImage img = random_image(1);
  CHECK_THROWS_AS(apply_mask(img, PointMask()), std::invalid_argument);
}

TEST_CASE("arc extraction and mask extraction agree as multisets") {
  const ArsImage img = random_image(31);
  const ArcSet arcs({0, 44, 179});
  std::vector<float> a = extract_arcs(img, arcs);
  std::vector<float> b = apply_mask(img, PointMask::from_arcs(arcs));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

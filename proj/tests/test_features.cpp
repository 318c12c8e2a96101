#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "arcscan/features.hpp"
#include "arcscan/image.hpp"
#include "oracles.hpp"

using namespace arcscan;

namespace {

double feature_of(std::span<const float> v, FeatureId id) {
  const FeatureId ids[] = {id};
  return extract(v, ids).values[0];
}

}  // namespace

TEST_CASE("constant vector hits the closed-form feature values") {
  const std::vector<float> v{3, 3, 3, 3};
  const auto& ids = paper_features();
  const FeatureVector fv = extract(v, ids);
  // mean, std, var, min, median, p25, p10, mad, rms, energy, range
  const double want[] = {3, 0, 0, 3, 3, 3, 3, 0, 3, 36, 0};
  for (std::size_t i = 0; i < ids.size(); ++i)
    CHECK(fv.values[i] == Catch::Approx(want[i]).margin(1e-12));
}

TEST_CASE("1..4 vector matches hand-computed features") {
  const std::vector<float> v{1, 2, 3, 4};
  CHECK(feature_of(v, FeatureId::Mean) == 2.5);
  CHECK(feature_of(v, FeatureId::Var) == 1.25);  // population convention
  CHECK(feature_of(v, FeatureId::Std) == Catch::Approx(std::sqrt(1.25)).epsilon(1e-14));
  CHECK(feature_of(v, FeatureId::Min) == 1.0);
  CHECK(feature_of(v, FeatureId::Range) == 3.0);
  CHECK(feature_of(v, FeatureId::Energy) == 30.0);
  CHECK(feature_of(v, FeatureId::Rms) == Catch::Approx(std::sqrt(7.5)).epsilon(1e-14));
  CHECK(feature_of(v, FeatureId::Mad) == 1.0);
  CHECK(feature_of(v, FeatureId::Median) == 2.5);
  // rank r = 0.25 * 3 = 0.75 -> 1 + 0.75
  CHECK(feature_of(v, FeatureId::P25) == 1.75);
  // rank r = 0.10 * 3 = 0.30 -> 1 + 0.3
  CHECK(feature_of(v, FeatureId::P10) == Catch::Approx(1.3).epsilon(1e-14));
}

TEST_CASE("random 10k vector matches the naive reference on all 11 features") {
  std::mt19937_64 gen(2024);
  const std::vector<float> v = oracle::random_vector(gen, 10000);
  for (FeatureId id : paper_features()) {
    const double got = feature_of(v, id);
    const double want = oracle::naive_feature(v, id);
    INFO(feature_name(id));
    CHECK(oracle::close_rel(got, want, 1e-10));
  }
}

TEST_CASE("whole candidate pool matches the naive reference on random input") {
  std::mt19937_64 gen(77);
  for (int rep = 0; rep < 25; ++rep) {
    std::uniform_int_distribution<std::size_t> len(1, 500);
    const std::vector<float> v = oracle::random_vector(gen, len(gen));
    for (FeatureId id : candidate_pool()) {
      INFO(feature_name(id) << " len=" << v.size() << " rep=" << rep);
      CHECK(oracle::close_rel(feature_of(v, id), oracle::naive_feature(v, id), 1e-9));
    }
  }
}

TEST_CASE("extract rejects empty input") {
  CHECK_THROWS_AS(extract({}, paper_features()), std::invalid_argument);
}

TEST_CASE("shared-workspace extraction is bit-identical to the reference") {
  std::mt19937_64 gen(31337);
  for (int rep = 0; rep < 50; ++rep) {
    std::uniform_int_distribution<std::size_t> len(1, 700);
    std::vector<float> v = oracle::random_vector(gen, len(gen));
    if (rep % 3 == 0)  // heavy ties
      for (auto& x : v) x = std::round(x / 100.0f) * 100.0f;
    const FeatureVector a = extract(v, candidate_pool());
    const FeatureVector b = detail::extract_shared(v, candidate_pool());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      INFO(feature_name(candidate_pool()[i]) << " rep=" << rep);
      CHECK(a.values[i] == b.values[i]);
    }
  }
}

TEST_CASE("features are permutation invariant") {
  std::mt19937_64 gen(9);
  std::vector<float> v = oracle::random_vector(gen, 333);
  std::vector<float> shuffled = v;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  for (FeatureId id : candidate_pool()) {
    INFO(feature_name(id));
    CHECK(oracle::close_rel(feature_of(v, id), feature_of(shuffled, id), 1e-9));
  }
}

TEST_CASE("features scale with the documented degree under a*x") {
  std::mt19937_64 gen(10);
  const std::vector<float> v = oracle::random_vector(gen, 256, 0.5, 100.0);
  const double a = 4.0;  // power of two: scaling floats is exact
  std::vector<float> scaled(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) scaled[i] = static_cast<float>(a * v[i]);

  const std::pair<FeatureId, int> degree[] = {
      {FeatureId::Mean, 1},   {FeatureId::Std, 1},    {FeatureId::Min, 1},
      {FeatureId::Median, 1}, {FeatureId::P25, 1},    {FeatureId::P10, 1},
      {FeatureId::Mad, 1},    {FeatureId::Rms, 1},    {FeatureId::Range, 1},
      {FeatureId::Var, 2},    {FeatureId::Energy, 2}, {FeatureId::Max, 1},
      {FeatureId::Sum, 1},    {FeatureId::Iqr, 1},    {FeatureId::Midhinge, 1},
      {FeatureId::Skewness, 0}, {FeatureId::Kurtosis, 0}};
  for (const auto& [id, deg] : degree) {
    const double factor = std::pow(a, deg);
    INFO(feature_name(id));
    CHECK(oracle::close_rel(feature_of(scaled, id), factor * feature_of(v, id), 1e-12));
  }
}

TEST_CASE("statistics are ordering independent between arc and mask sampling") {
  std::mt19937_64 gen(55);
  std::vector<float> px(kPixelCount);
  std::uniform_real_distribution<float> u(0.0f, 50.0f);
  for (auto& x : px) x = u(gen);
  const ArsImage img(std::move(px), DeficiencyClass::d20);
  const ArcSet arcs({7, 80, 133});
  const std::vector<float> by_arcs = extract_arcs(img, arcs);
  const std::vector<float> by_mask = apply_mask(img, PointMask::from_arcs(arcs));
  const FeatureVector a = extract(by_arcs, paper_features());
  const FeatureVector b = extract(by_mask, paper_features());
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(oracle::close_rel(a.values[i], b.values[i], 1e-10));
}

TEST_CASE("extract_dataset stacks rows and copies labels") {
  std::mt19937_64 gen(66);
  std::vector<ArsImage> images;
  for (int i = 0; i < 6; ++i) {
    std::vector<float> px(kPixelCount);
    std::uniform_real_distribution<float> u(0.0f, 10.0f);
    for (auto& x : px) x = u(gen);
    images.emplace_back(std::move(px), class_from_index(i % kClassCount));
  }
  const FeatureMatrix m = extract_dataset(images, paper_features());
  REQUIRE(m.rows() == 6);
  REQUIRE(m.cols() == 11);
  CHECK(m.labels[3] == DeficiencyClass::d40);

  // single image dataset equals extract of its pixels
  const FeatureMatrix one = extract_dataset(std::span(images.data(), 1), paper_features());
  const FeatureVector fv = extract(images[0].pixels(), paper_features());
  for (int j = 0; j < one.cols(); ++j) CHECK(one.values(0, j) == fv.values[j]);

  // parallel and serial agree bitwise
  const FeatureMatrix par = extract_dataset(images, paper_features(), 4);
  CHECK(par.values == m.values);

  // arc and mask variants agree with direct extraction
  const ArcSet arcs({10, 90});
  const FeatureMatrix ma = extract_dataset(images, arcs, paper_features());
  const FeatureVector fa = extract(extract_arcs(images[2], arcs), paper_features());
  for (int j = 0; j < ma.cols(); ++j) CHECK(ma.values(2, j) == fa.values[j]);
}

TEST_CASE("feature names parse back to ids") {
  for (FeatureId id : candidate_pool()) {
    const auto parsed = parse_feature(feature_name(id));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == id);
  }
  CHECK(!parse_feature("nope").has_value());
}

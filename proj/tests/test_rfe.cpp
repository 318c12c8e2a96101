#include <catch_amalgamated.hpp>
#include <random>

#include "arcscan/rfe.hpp"
#include "oracles.hpp"

using namespace arcscan;

namespace {

FeatureMatrix labeled(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  FeatureMatrix m;
  m.values = x;
  for (int c : y) m.labels.push_back(class_from_index(c));
  for (int j = 0; j < x.cols(); ++j) m.ids.push_back(static_cast<FeatureId>(j));
  return m;
}

}  // namespace

TEST_CASE("rfe trace shrinks by one feature a step down to min_features") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = 9, n = 120;
  Eigen::MatrixXd x(n, d);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 3;
    for (int j = 0; j < d; ++j) x(i, j) = normal(gen) + (j < 3 ? 2.0 * y[i] : 0.0);
  }
  const RfeTrace trace = rfe(labeled(x, y), 4, 77);
  REQUIRE(trace.steps.size() == d - 4 + 1);
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    CHECK(trace.steps[t].active.size() == d - t);
    if (t + 1 < trace.steps.size())
      CHECK(trace.steps[t].removed.has_value());
    else
      CHECK(!trace.steps[t].removed.has_value());
  }
}

TEST_CASE("an exact duplicate column is eliminated first with no accuracy drop") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 150;
  Eigen::MatrixXd x(n, 4);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 3;
    x(i, 0) = 3.0 * y[i] + 0.3 * normal(gen);
    x(i, 1) = -2.0 * y[i] + 0.3 * normal(gen);
    x(i, 2) = normal(gen);
    x(i, 3) = x(i, 0);  // exact copy of column 0
  }
  const RfeTrace trace = rfe(labeled(x, y), 2, 99);
  const FeatureId removed_first = *trace.steps[0].removed;
  const bool removed_a_copy = removed_first == static_cast<FeatureId>(0) ||
                              removed_first == static_cast<FeatureId>(3) ||
                              removed_first == static_cast<FeatureId>(2);
  // the duplicated pair splits its weight, so one of {0,3} (or the pure
  // noise column) must fall before the informative singleton column 1
  CHECK(removed_a_copy);
  CHECK(trace.steps[1].accuracy >= trace.steps[0].accuracy - 1e-12);
}

TEST_CASE("a pure-noise feature falls before the class-mean feature") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 gen(1000 + seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 200;
    Eigen::MatrixXd x(n, 2);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = i % 2;
      x(i, 0) = 2.0 * y[i] + 0.5 * normal(gen);  // informative
      x(i, 1) = normal(gen);                     // label-independent
    }
    const RfeTrace trace = rfe(labeled(x, y), 1, seed);
    if (*trace.steps[0].removed == static_cast<FeatureId>(1)) ++wins;
  }
  CHECK(wins >= 9);
}

TEST_CASE("rfe validates inputs") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(20, 3);
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) {
    y[i] = i % 2;
    for (int j = 0; j < 3; ++j) x(i, j) = normal(gen);
  }
  CHECK_THROWS_AS(rfe(labeled(x, y), 4, 1), std::invalid_argument);

  // all identical rows per class: zero within-class variance everywhere
  Eigen::MatrixXd z(10, 2);
  std::vector<int> zy(10);
  for (int i = 0; i < 10; ++i) {
    zy[i] = i % 2;
    z(i, 0) = zy[i];
    z(i, 1) = 2.0 * zy[i];
  }
  CHECK_THROWS_AS(rfe(labeled(z, zy), 1, 1), std::invalid_argument);

  // single class
  std::vector<int> ones(20, 1);
  CHECK_THROWS_AS(rfe(labeled(x, ones), 1, 1), std::invalid_argument);
}

TEST_CASE("rfe timing hook lands in the trace") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(60, 4);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) {
    y[i] = i % 2;
    for (int j = 0; j < 4; ++j) x(i, j) = normal(gen) + (j == 0 ? y[i] * 3.0 : 0.0);
  }
  const RfeTrace trace =
      rfe(labeled(x, y), 2, 4, 0.7, 1e-6,
          [](std::span<const FeatureId> ids) { return 0.001 * ids.size(); });
  REQUIRE(trace.steps.size() == 3);
  CHECK(trace.steps[0].extraction_seconds == Catch::Approx(0.004));
  CHECK(trace.steps[2].extraction_seconds == Catch::Approx(0.002));
}

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcscan/features.hpp"
#include "arcscan/lda.hpp"
#include "arcscan/rng.hpp"
#include "arcscan/split.hpp"

namespace arcscan {

struct RfeStep {
  std::vector<FeatureId> active;
  double accuracy = 0.0;
  double extraction_seconds = 0.0;
  std::optional<FeatureId> removed;  // eliminated after this step
  double removed_importance = 0.0;
};

struct RfeTrace {
  std::vector<RfeStep> steps;
};

// Optional wall-clock probe: given an active feature list, returns the
// measured extraction seconds for it.
using RfeTimer = std::function<double(std::span<const FeatureId>)>;

// Recursive feature elimination with LDA importance. One fixed stratified
// split for the whole trace so accuracies stay comparable; each step fits
// on the train rows, scores on the test rows, and drops the single active
// feature with the lowest importance phi_j until min_features remain.
inline RfeTrace rfe(const FeatureMatrix& matrix, int min_features,
                    std::uint64_t split_seed, double train_frac = 0.7,
                    double ridge = 1e-6, const RfeTimer& timer = {}) {
  if (matrix.cols() < min_features || min_features < 1)
    throw std::invalid_argument("rfe: matrix must have >= min_features columns");
  {
    auto [sb, sw] = scatter_matrices(matrix);
    (void)sb;
    if (!(sw.trace() > 0.0))
      throw std::invalid_argument(
          "rfe: degenerate matrix, zero within-class variance on all features");
    bool multiclass = false;
    for (std::size_t i = 1; i < matrix.labels.size(); ++i)
      if (matrix.labels[i] != matrix.labels[0]) multiclass = true;
    if (!multiclass)
      throw std::invalid_argument("rfe: need at least two classes");
  }

  auto gen = rng::engine(rng::derive(split_seed, rng::kRfe));
  auto [train_idx, test_idx] = stratified_split2(matrix.labels, train_frac, gen);
  const FeatureMatrix train_all = matrix.select_rows(train_idx);
  const FeatureMatrix test_all = matrix.select_rows(test_idx);

  std::vector<int> active(matrix.cols());
  for (int j = 0; j < matrix.cols(); ++j) active[j] = j;

  RfeTrace trace;
  while (true) {
    RfeStep step;
    for (int j : active) step.active.push_back(matrix.ids[j]);

    const FeatureMatrix train = train_all.select_columns(active);
    const FeatureMatrix test = test_all.select_columns(active);
    const LdaModel model = fit(train, ridge);
    step.accuracy = accuracy(model, test);
    if (timer) step.extraction_seconds = timer(step.active);

    if (static_cast<int>(active.size()) > min_features) {
      const Eigen::VectorXd phi = importance(model);
      int worst = 0;
      for (int j = 1; j < phi.size(); ++j)
        if (phi(j) < phi(worst)) worst = j;  // ties keep the earliest feature
      step.removed = matrix.ids[active[worst]];
      step.removed_importance = phi(worst);
      trace.steps.push_back(std::move(step));
      active.erase(active.begin() + worst);
    } else {
      trace.steps.push_back(std::move(step));
      break;
    }
  }
  return trace;
}

// Timer measuring reference extraction over a fixed image workload,
// min over `repeats` runs. Times extract(), whose per-feature passes make
// the cost of an active set scale with its size.
inline RfeTimer extraction_timer(std::span<const ArsImage> images, int repeats = 3) {
  return [images, repeats](std::span<const FeatureId> ids) {
    double best = std::numeric_limits<double>::max();
    double sink = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      for (const ArsImage& img : images) {
        const FeatureVector fv = extract(img.pixels(), ids);
        sink += fv.values[0];
      }
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    // keep the loop observable
    if (sink == std::numeric_limits<double>::infinity()) return -1.0;
    return best;
  };
}

}  // namespace arcscan

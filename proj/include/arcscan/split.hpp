#pragma once

#include <algorithm>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcscan/image.hpp"

namespace arcscan {

// Index partitions for one repetition. PSO fitness sees train (model fit)
// and val (fitness accuracy); eval stays untouched until the final report.
struct Splits {
  std::vector<int> train, val, eval;
};

namespace detail {

inline std::vector<std::vector<int>> indices_by_class(
    std::span<const DeficiencyClass> labels) {
  std::vector<std::vector<int>> by_class(kClassCount);
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[class_index(labels[i])].push_back(static_cast<int>(i));
  return by_class;
}

}  // namespace detail

// Stratified three-way split: train_frac of each class to train, the
// remainder halved between val and eval.
inline Splits stratified_split3(std::span<const DeficiencyClass> labels,
                                double train_frac, std::mt19937_64& rng) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("train fraction must be in (0,1)");
  Splits s;
  for (auto& cls : detail::indices_by_class(labels)) {
    if (cls.empty()) continue;
    std::shuffle(cls.begin(), cls.end(), rng);
    const auto n = static_cast<int>(cls.size());
    const int n_tr = static_cast<int>(std::llround(train_frac * n));
    const int n_val = static_cast<int>(std::llround((n - n_tr) / 2.0));
    for (int i = 0; i < n; ++i) {
      if (i < n_tr)
        s.train.push_back(cls[i]);
      else if (i < n_tr + n_val)
        s.val.push_back(cls[i]);
      else
        s.eval.push_back(cls[i]);
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.eval.begin(), s.eval.end());
  return s;
}

// Stratified two-way split (train/test), used by the RFE trace.
inline std::pair<std::vector<int>, std::vector<int>> stratified_split2(
    std::span<const DeficiencyClass> labels, double train_frac,
    std::mt19937_64& rng) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("train fraction must be in (0,1)");
  std::vector<int> train, test;
  for (auto& cls : detail::indices_by_class(labels)) {
    if (cls.empty()) continue;
    std::shuffle(cls.begin(), cls.end(), rng);
    const auto n = static_cast<int>(cls.size());
    const int n_tr = static_cast<int>(std::llround(train_frac * n));
    for (int i = 0; i < n; ++i)
      (i < n_tr ? train : test).push_back(cls[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

}  // namespace arcscan

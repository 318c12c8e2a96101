#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arcscan/image.hpp"
#include "arcscan/parallel.hpp"

namespace arcscan {

// Statistical descriptors of a sampled intensity vector. The first eleven
// are the canonical set used by the classifier; the remainder fill the
// 30-feature candidate pool that recursive feature elimination starts from.
enum class FeatureId : std::uint8_t {
  Mean = 0,
  Std,
  Var,
  Min,
  Median,
  P25,
  P10,
  Mad,   // mean absolute deviation about the mean
  Rms,
  Energy,
  Range,
  // candidate pool
  Max,
  P75,
  P90,
  Skewness,
  Kurtosis,
  Iqr,
  P05,
  P30,
  P40,
  P60,
  P70,
  P80,
  P95,
  TrimmedMean10,    // mean of the middle 80% of sorted values
  Midhinge,         // (P25 + P75) / 2
  DecileRange,      // P90 - P10
  MedAbsDev,        // median absolute deviation about the median
  AvgAbsDevMedian,  // mean absolute deviation about the median
  Sum,
};

inline constexpr int kFeaturePoolSize = 30;

inline std::string_view feature_name(FeatureId id) {
  switch (id) {
    case FeatureId::Mean: return "mean";
    case FeatureId::Std: return "std";
    case FeatureId::Var: return "var";
    case FeatureId::Min: return "min";
    case FeatureId::Median: return "median";
    case FeatureId::P25: return "p25";
    case FeatureId::P10: return "p10";
    case FeatureId::Mad: return "mad";
    case FeatureId::Rms: return "rms";
    case FeatureId::Energy: return "energy";
    case FeatureId::Range: return "range";
    case FeatureId::Max: return "max";
    case FeatureId::P75: return "p75";
    case FeatureId::P90: return "p90";
    case FeatureId::Skewness: return "skewness";
    case FeatureId::Kurtosis: return "kurtosis";
    case FeatureId::Iqr: return "iqr";
    case FeatureId::P05: return "p05";
    case FeatureId::P30: return "p30";
    case FeatureId::P40: return "p40";
    case FeatureId::P60: return "p60";
    case FeatureId::P70: return "p70";
    case FeatureId::P80: return "p80";
    case FeatureId::P95: return "p95";
    case FeatureId::TrimmedMean10: return "trimmed_mean10";
    case FeatureId::Midhinge: return "midhinge";
    case FeatureId::DecileRange: return "decile_range";
    case FeatureId::MedAbsDev: return "med_abs_dev";
    case FeatureId::AvgAbsDevMedian: return "avg_abs_dev_median";
    case FeatureId::Sum: return "sum";
  }
  return "unknown";
}

inline std::optional<FeatureId> parse_feature(std::string_view name) {
  for (int i = 0; i < kFeaturePoolSize; ++i) {
    const auto id = static_cast<FeatureId>(i);
    if (feature_name(id) == name) return id;
  }
  return std::nullopt;
}

// The eleven canonical features, in their published order.
inline const std::vector<FeatureId>& paper_features() {
  static const std::vector<FeatureId> ids{
      FeatureId::Mean, FeatureId::Std,  FeatureId::Var,    FeatureId::Min,
      FeatureId::Median, FeatureId::P25, FeatureId::P10,   FeatureId::Mad,
      FeatureId::Rms,  FeatureId::Energy, FeatureId::Range};
  return ids;
}

// Full 30-feature pool for the elimination experiments.
inline const std::vector<FeatureId>& candidate_pool() {
  static const std::vector<FeatureId> ids = [] {
    std::vector<FeatureId> v;
    for (int i = 0; i < kFeaturePoolSize; ++i)
      v.push_back(static_cast<FeatureId>(i));
    return v;
  }();
  return ids;
}

struct FeatureVector {
  std::vector<double> values;
  int source_id = -1;
};

namespace detail {

inline double sum_in_order(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += x;
  return s;
}

inline double sum_sq(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return s;
}

inline double sum_sq_dev(std::span<const float> v, double mu) {
  double s = 0.0;
  for (float x : v) {
    const double d = x - mu;
    s += d * d;
  }
  return s;
}

inline double sum_abs_dev(std::span<const float> v, double center) {
  double s = 0.0;
  for (float x : v) s += std::abs(x - center);
  return s;
}

inline double sum_cube_dev(std::span<const float> v, double mu) {
  double s = 0.0;
  for (float x : v) {
    const double d = x - mu;
    s += d * d * d;
  }
  return s;
}

inline double sum_quart_dev(std::span<const float> v, double mu) {
  double s = 0.0;
  for (float x : v) {
    const double d = x - mu;
    s += d * d * d * d;
  }
  return s;
}

// Percentile convention: rank r = p/100 * (M-1) over ascending order
// statistics, linear interpolation between floor(r) and ceil(r).
template <class OrderStat>
double percentile_impl(double p, std::size_t m, OrderStat&& os) {
  const double r = p / 100.0 * static_cast<double>(m - 1);
  const auto lo = static_cast<std::size_t>(r);
  const double vlo = os(lo);
  if (r == static_cast<double>(lo)) return vlo;
  const double vhi = os(lo + 1);
  return vlo + (r - static_cast<double>(lo)) * (vhi - vlo);
}

// j-th order statistic via partial selection into scratch.
template <class T>
double order_stat_select(std::span<const T> v, std::size_t j,
                         std::vector<T>& scratch) {
  scratch.assign(v.begin(), v.end());
  std::nth_element(scratch.begin(), scratch.begin() + j, scratch.end());
  return scratch[j];
}

template <class T>
double percentile_select(std::span<const T> v, double p, std::vector<T>& scratch) {
  return percentile_impl(p, v.size(), [&](std::size_t j) {
    return order_stat_select(v, j, scratch);
  });
}

inline double skewness_from(double m2, double m3) {
  if (m2 <= 0.0) return 0.0;
  return m3 / (m2 * std::sqrt(m2));
}

inline double kurtosis_from(double m2, double m4) {
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2);
}

inline double trimmed_mean_sorted(std::span<const float> sorted) {
  const std::size_t m = sorted.size();
  const auto cut = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(m)));
  const std::size_t lo = cut, hi = m - cut;
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += sorted[i];
  return s / static_cast<double>(hi - lo);
}

}  // namespace detail

// Reference extraction. Every feature is computed with at least one pass
// of its own over the data; only scalar prerequisites (the mean, and the
// median for the median-deviation features) are shared. This keeps the
// measured cost of an active feature set honest: dropping any feature
// drops real work.
inline FeatureVector extract(std::span<const float> values,
                             std::span<const FeatureId> ids) {
  if (values.empty())
    throw std::invalid_argument("extract: empty input vector");
  const auto m = static_cast<double>(values.size());

  bool have_mean = false, have_median = false;
  double mu = 0.0, med = 0.0;
  std::vector<float> scratch;
  auto mean_prereq = [&] {
    if (!have_mean) {
      mu = detail::sum_in_order(values) / m;
      have_mean = true;
    }
    return mu;
  };
  auto median_prereq = [&] {
    if (!have_median) {
      med = detail::percentile_select(values, 50.0, scratch);
      have_median = true;
    }
    return med;
  };

  FeatureVector out;
  out.values.reserve(ids.size());
  for (FeatureId id : ids) {
    double v = 0.0;
    switch (id) {
      case FeatureId::Mean:
        v = detail::sum_in_order(values) / m;
        break;
      case FeatureId::Std:
        v = std::sqrt(detail::sum_sq_dev(values, mean_prereq()) / m);
        break;
      case FeatureId::Var:
        v = detail::sum_sq_dev(values, mean_prereq()) / m;
        break;
      case FeatureId::Min:
        v = *std::min_element(values.begin(), values.end());
        break;
      case FeatureId::Max:
        v = *std::max_element(values.begin(), values.end());
        break;
      case FeatureId::Median:
        v = detail::percentile_select(values, 50.0, scratch);
        break;
      case FeatureId::P05:
        v = detail::percentile_select(values, 5.0, scratch);
        break;
      case FeatureId::P10:
        v = detail::percentile_select(values, 10.0, scratch);
        break;
      case FeatureId::P25:
        v = detail::percentile_select(values, 25.0, scratch);
        break;
      case FeatureId::P30:
        v = detail::percentile_select(values, 30.0, scratch);
        break;
      case FeatureId::P40:
        v = detail::percentile_select(values, 40.0, scratch);
        break;
      case FeatureId::P60:
        v = detail::percentile_select(values, 60.0, scratch);
        break;
      case FeatureId::P70:
        v = detail::percentile_select(values, 70.0, scratch);
        break;
      case FeatureId::P75:
        v = detail::percentile_select(values, 75.0, scratch);
        break;
      case FeatureId::P80:
        v = detail::percentile_select(values, 80.0, scratch);
        break;
      case FeatureId::P90:
        v = detail::percentile_select(values, 90.0, scratch);
        break;
      case FeatureId::P95:
        v = detail::percentile_select(values, 95.0, scratch);
        break;
      case FeatureId::Mad:
        v = detail::sum_abs_dev(values, mean_prereq()) / m;
        break;
      case FeatureId::Rms:
        v = std::sqrt(detail::sum_sq(values) / m);
        break;
      case FeatureId::Energy:
        v = detail::sum_sq(values);
        break;
      case FeatureId::Range: {
        auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        v = static_cast<double>(*mx) - static_cast<double>(*mn);
        break;
      }
      case FeatureId::Skewness: {
        const double mean = mean_prereq();
        const double m2 = detail::sum_sq_dev(values, mean) / m;
        const double m3 = detail::sum_cube_dev(values, mean) / m;
        v = detail::skewness_from(m2, m3);
        break;
      }
      case FeatureId::Kurtosis: {
        const double mean = mean_prereq();
        const double m2 = detail::sum_sq_dev(values, mean) / m;
        const double m4 = detail::sum_quart_dev(values, mean) / m;
        v = detail::kurtosis_from(m2, m4);
        break;
      }
      case FeatureId::Iqr:
        v = detail::percentile_select(values, 75.0, scratch) -
            detail::percentile_select(values, 25.0, scratch);
        break;
      case FeatureId::TrimmedMean10:
        scratch.assign(values.begin(), values.end());
        std::sort(scratch.begin(), scratch.end());
        v = detail::trimmed_mean_sorted(scratch);
        break;
      case FeatureId::Midhinge:
        v = 0.5 * (detail::percentile_select(values, 25.0, scratch) +
                   detail::percentile_select(values, 75.0, scratch));
        break;
      case FeatureId::DecileRange:
        v = detail::percentile_select(values, 90.0, scratch) -
            detail::percentile_select(values, 10.0, scratch);
        break;
      case FeatureId::MedAbsDev: {
        const double c = median_prereq();
        std::vector<double> dev(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
          dev[i] = std::abs(values[i] - c);
        std::vector<double> dscratch;
        v = detail::percentile_select(std::span<const double>(dev), 50.0, dscratch);
        break;
      }
      case FeatureId::AvgAbsDevMedian:
        v = detail::sum_abs_dev(values, median_prereq()) / m;
        break;
      case FeatureId::Sum:
        v = detail::sum_in_order(values);
        break;
    }
    out.values.push_back(v);
  }
  return out;
}

namespace detail {

// Production extraction path: sorts once and reuses scalar moments across
// features. Produces bit-identical values to extract(): order statistics
// are value-exact regardless of how they are selected, and all sums
// accumulate in the original input order.
inline FeatureVector extract_shared(std::span<const float> values,
                                    std::span<const FeatureId> ids,
                                    std::vector<float>& sort_buf) {
  if (values.empty())
    throw std::invalid_argument("extract: empty input vector");
  const auto m = static_cast<double>(values.size());

  sort_buf.assign(values.begin(), values.end());
  std::sort(sort_buf.begin(), sort_buf.end());
  std::span<const float> sorted(sort_buf);
  auto os = [&](std::size_t j) { return static_cast<double>(sorted[j]); };
  auto pct = [&](double p) { return percentile_impl(p, sorted.size(), os); };

  bool have_mean = false, have_m2 = false, have_sumsq = false, have_median = false;
  double mu = 0.0, m2s = 0.0, sq = 0.0, med = 0.0;
  auto mean = [&] {
    if (!have_mean) { mu = sum_in_order(values) / m; have_mean = true; }
    return mu;
  };
  auto m2 = [&] {
    if (!have_m2) { m2s = sum_sq_dev(values, mean()); have_m2 = true; }
    return m2s;
  };
  auto sumsq = [&] {
    if (!have_sumsq) { sq = sum_sq(values); have_sumsq = true; }
    return sq;
  };
  auto median = [&] {
    if (!have_median) { med = pct(50.0); have_median = true; }
    return med;
  };

  FeatureVector out;
  out.values.reserve(ids.size());
  for (FeatureId id : ids) {
    double v = 0.0;
    switch (id) {
      case FeatureId::Mean: v = mean(); break;
      case FeatureId::Std: v = std::sqrt(m2() / m); break;
      case FeatureId::Var: v = m2() / m; break;
      case FeatureId::Min: v = sorted.front(); break;
      case FeatureId::Max: v = sorted.back(); break;
      case FeatureId::Median: v = median(); break;
      case FeatureId::P05: v = pct(5.0); break;
      case FeatureId::P10: v = pct(10.0); break;
      case FeatureId::P25: v = pct(25.0); break;
      case FeatureId::P30: v = pct(30.0); break;
      case FeatureId::P40: v = pct(40.0); break;
      case FeatureId::P60: v = pct(60.0); break;
      case FeatureId::P70: v = pct(70.0); break;
      case FeatureId::P75: v = pct(75.0); break;
      case FeatureId::P80: v = pct(80.0); break;
      case FeatureId::P90: v = pct(90.0); break;
      case FeatureId::P95: v = pct(95.0); break;
      case FeatureId::Mad: v = sum_abs_dev(values, mean()) / m; break;
      case FeatureId::Rms: v = std::sqrt(sumsq() / m); break;
      case FeatureId::Energy: v = sumsq(); break;
      case FeatureId::Range:
        v = static_cast<double>(sorted.back()) - static_cast<double>(sorted.front());
        break;
      case FeatureId::Skewness:
        v = skewness_from(m2() / m, sum_cube_dev(values, mean()) / m);
        break;
      case FeatureId::Kurtosis:
        v = kurtosis_from(m2() / m, sum_quart_dev(values, mean()) / m);
        break;
      case FeatureId::Iqr: v = pct(75.0) - pct(25.0); break;
      case FeatureId::TrimmedMean10: v = trimmed_mean_sorted(sorted); break;
      case FeatureId::Midhinge: v = 0.5 * (pct(25.0) + pct(75.0)); break;
      case FeatureId::DecileRange: v = pct(90.0) - pct(10.0); break;
      case FeatureId::MedAbsDev: {
        const double c = median();
        std::vector<double> dev(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
          dev[i] = std::abs(values[i] - c);
        std::vector<double> dscratch;
        v = percentile_select(std::span<const double>(dev), 50.0, dscratch);
        break;
      }
      case FeatureId::AvgAbsDevMedian:
        v = sum_abs_dev(values, median()) / m;
        break;
      case FeatureId::Sum: v = sum_in_order(values); break;
    }
    out.values.push_back(v);
  }
  return out;
}

inline FeatureVector extract_shared(std::span<const float> values,
                                    std::span<const FeatureId> ids) {
  std::vector<float> buf;
  return extract_shared(values, ids, buf);
}

}  // namespace detail

// Dataset-level feature stack with labels.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // N x d
  std::vector<DeficiencyClass> labels;
  std::vector<FeatureId> ids;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }

  FeatureMatrix select_rows(std::span<const int> idx) const {
    FeatureMatrix out;
    out.ids = ids;
    out.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
    out.labels.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.values.row(static_cast<Eigen::Index>(i)) = values.row(idx[i]);
      out.labels.push_back(labels[idx[i]]);
    }
    return out;
  }

  FeatureMatrix select_columns(std::span<const int> keep) const {
    FeatureMatrix out;
    out.labels = labels;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.values.col(static_cast<Eigen::Index>(j)) = values.col(keep[j]);
      out.ids.push_back(ids[keep[j]]);
    }
    return out;
  }
};

namespace detail {

template <class Sampler>
FeatureMatrix extract_dataset_impl(std::span<const ArsImage> images,
                                   std::span<const FeatureId> ids,
                                   int threads, Sampler&& sampler) {
  if (images.empty())
    throw std::invalid_argument("extract_dataset: empty dataset");
  FeatureMatrix out;
  out.ids.assign(ids.begin(), ids.end());
  out.values.resize(static_cast<Eigen::Index>(images.size()),
                    static_cast<Eigen::Index>(ids.size()));
  out.labels.resize(images.size());
  parallel_for(static_cast<int>(images.size()), threads, [&](int i) {
    const ArsImage& img = images[i];
    if (!img.label())
      throw std::invalid_argument("extract_dataset: image without label");
    const std::vector<float> sampled = sampler(img);
    std::vector<float> buf;
    const FeatureVector fv = extract_shared(sampled, ids, buf);
    for (std::size_t j = 0; j < fv.values.size(); ++j)
      out.values(i, static_cast<Eigen::Index>(j)) = fv.values[j];
    out.labels[i] = *img.label();
  });
  return out;
}

}  // namespace detail

// Full images, row-major sampling order.
inline FeatureMatrix extract_dataset(std::span<const ArsImage> images,
                                     std::span<const FeatureId> ids,
                                     int threads = 1) {
  return detail::extract_dataset_impl(images, ids, threads, [](const ArsImage& img) {
    return std::vector<float>(img.pixels().begin(), img.pixels().end());
  });
}

inline FeatureMatrix extract_dataset(std::span<const ArsImage> images,
                                     const ArcSet& arcs,
                                     std::span<const FeatureId> ids,
                                     int threads = 1) {
  return detail::extract_dataset_impl(images, ids, threads, [&](const ArsImage& img) {
    return extract_arcs(img, arcs);
  });
}

inline FeatureMatrix extract_dataset(std::span<const ArsImage> images,
                                     const PointMask& mask,
                                     std::span<const FeatureId> ids,
                                     int threads = 1) {
  return detail::extract_dataset_impl(images, ids, threads, [&](const ArsImage& img) {
    return apply_mask(img, mask);
  });
}

inline void write_feature_csv(const FeatureMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t j = 0; j < matrix.ids.size(); ++j)
    out << feature_name(matrix.ids[j]) << ',';
  out << "label\n";
  char buf[40];
  for (int i = 0; i < matrix.rows(); ++i) {
    for (int j = 0; j < matrix.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.values(i, j));
      out << buf << ',';
    }
    out << kDeficiencyPercent[class_index(matrix.labels[i])] << '\n';
  }
}

}  // namespace arcscan

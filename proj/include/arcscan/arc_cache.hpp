#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcscan/features.hpp"
#include "arcscan/image.hpp"
#include "arcscan/parallel.hpp"

namespace arcscan {

namespace detail {

// Order-preserving map from finite float to uint32, used to bisect for
// exact order statistics without merging columns.
inline std::uint32_t float_key(float x) {
  const auto u = std::bit_cast<std::uint32_t>(x);
  return (u & 0x80000000u) ? ~u : (u | 0x80000000u);
}

inline float float_unkey(std::uint32_t k) {
  const std::uint32_t u = (k & 0x80000000u) ? (k & 0x7fffffffu) : ~k;
  return std::bit_cast<float>(u);
}

}  // namespace detail

// Per-image, per-column sorted values plus running sums. Lets the PSO
// fitness loop compose the statistical features of any arc subset in
// roughly O(k log 180) per order statistic instead of re-extracting
// 180*k pixels per evaluation. Values agree with the extract() route up
// to floating-point reassociation of the sums.
class ArcFeatureCache {
 public:
  explicit ArcFeatureCache(std::span<const ArsImage> images, int threads = 1)
      : n_images_(static_cast<int>(images.size())) {
    sorted_.resize(static_cast<std::size_t>(n_images_) * kPixelCount);
    prefix_.resize(static_cast<std::size_t>(n_images_) * kImageSize * (kImageSize + 1));
    agg_.resize(static_cast<std::size_t>(n_images_) * kImageSize);
    parallel_for(n_images_, threads, [&](int i) { build_image(images[i], i); });
  }

  int image_count() const { return n_images_; }

  // Features of the union of the given arc columns for one image.
  void compose(int image, std::span<const int> arcs,
               std::span<const FeatureId> ids, std::span<double> out) const {
    const int k = static_cast<int>(arcs.size());
    if (k == 0) throw std::invalid_argument("compose: empty arc set");
    const double m = static_cast<double>(k) * kImageSize;

    double total = 0.0, totsq = 0.0;
    float mn = std::numeric_limits<float>::max();
    float mx = std::numeric_limits<float>::lowest();
    for (int c : arcs) {
      const ColAgg& a = agg_[static_cast<std::size_t>(image) * kImageSize + c];
      total += a.sum;
      totsq += a.sumsq;
      mn = std::min(mn, a.min);
      mx = std::max(mx, a.max);
    }

    bool have_mean = false, have_m2 = false;
    double mu = 0.0, m2s = 0.0;
    auto mean = [&] {
      if (!have_mean) { mu = total / m; have_mean = true; }
      return mu;
    };
    auto m2 = [&] {
      if (!have_m2) {
        m2s = totsq - 2.0 * mean() * total + m * mean() * mean();
        m2s = std::max(m2s, 0.0);
        have_m2 = true;
      }
      return m2s;
    };
    auto pct = [&](double p) {
      return percentile(image, arcs, p, static_cast<std::size_t>(m), mn, mx);
    };

    for (std::size_t i = 0; i < ids.size(); ++i) {
      double v = 0.0;
      switch (ids[i]) {
        case FeatureId::Mean: v = mean(); break;
        case FeatureId::Std: v = std::sqrt(m2() / m); break;
        case FeatureId::Var: v = m2() / m; break;
        case FeatureId::Min: v = mn; break;
        case FeatureId::Max: v = mx; break;
        case FeatureId::Median: v = pct(50.0); break;
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
        case FeatureId::Mad: v = abs_dev_sum(image, arcs, mean()) / m; break;
        case FeatureId::Rms: v = std::sqrt(totsq / m); break;
        case FeatureId::Energy: v = totsq; break;
        case FeatureId::Range:
          v = static_cast<double>(mx) - static_cast<double>(mn);
          break;
        case FeatureId::Sum: v = total; break;
        case FeatureId::Iqr: v = pct(75.0) - pct(25.0); break;
        case FeatureId::Midhinge: v = 0.5 * (pct(25.0) + pct(75.0)); break;
        case FeatureId::DecileRange: v = pct(90.0) - pct(10.0); break;
        default:
          throw std::invalid_argument(
              std::string("ArcFeatureCache: feature not composable: ") +
              std::string(feature_name(ids[i])));
      }
      out[i] = v;
    }
  }

 private:
  struct ColAgg {
    double sum, sumsq;
    float min, max;
  };

  const float* column(int image, int c) const {
    return sorted_.data() +
           (static_cast<std::size_t>(image) * kImageSize + c) * kImageSize;
  }
  const double* col_prefix(int image, int c) const {
    return prefix_.data() +
           (static_cast<std::size_t>(image) * kImageSize + c) * (kImageSize + 1);
  }

  void build_image(const ArsImage& img, int i) {
    float colbuf[kImageSize];
    for (int c = 0; c < kImageSize; ++c) {
      for (int r = 0; r < kImageSize; ++r) colbuf[r] = img(r, c);
      std::sort(colbuf, colbuf + kImageSize);
      float* dst = sorted_.data() +
                   (static_cast<std::size_t>(i) * kImageSize + c) * kImageSize;
      std::copy(colbuf, colbuf + kImageSize, dst);
      double* pre = prefix_.data() +
                    (static_cast<std::size_t>(i) * kImageSize + c) * (kImageSize + 1);
      double acc = 0.0, accsq = 0.0;
      pre[0] = 0.0;
      for (int r = 0; r < kImageSize; ++r) {
        acc += colbuf[r];
        accsq += static_cast<double>(colbuf[r]) * colbuf[r];
        pre[r + 1] = acc;
      }
      agg_[static_cast<std::size_t>(i) * kImageSize + c] = {
          acc, accsq, colbuf[0], colbuf[kImageSize - 1]};
    }
  }

  std::size_t count_le(int image, std::span<const int> arcs, float v) const {
    std::size_t n = 0;
    for (int c : arcs) {
      const float* col = column(image, c);
      n += static_cast<std::size_t>(
          std::upper_bound(col, col + kImageSize, v) - col);
    }
    return n;
  }

  // Exact j-th smallest of the arc-set union via bisection on float keys.
  double order_stat(int image, std::span<const int> arcs, std::size_t j,
                    float mn, float mx) const {
    std::uint32_t lo = detail::float_key(mn);
    std::uint32_t hi = detail::float_key(mx);
    while (lo < hi) {
      const std::uint32_t mid = lo + (hi - lo) / 2;
      const float v = detail::float_unkey(mid);
      if (count_le(image, arcs, v) >= j + 1)
        hi = mid;
      else
        lo = mid + 1;
    }
    const float r = detail::float_unkey(lo);
    return r == 0.0f ? 0.0 : static_cast<double>(r);  // canonicalize -0
  }

  // Same interpolation as percentile_impl, with the upper order statistic
  // resolved from the lower one: either a duplicate covers it, or it is
  // the smallest element above it.
  double percentile(int image, std::span<const int> arcs, double p,
                    std::size_t m, float mn, float mx) const {
    const double r = p / 100.0 * static_cast<double>(m - 1);
    const auto lo = static_cast<std::size_t>(r);
    const double vlo = order_stat(image, arcs, lo, mn, mx);
    if (r == static_cast<double>(lo)) return vlo;
    double vhi;
    const float flo = static_cast<float>(vlo);
    if (count_le(image, arcs, flo) >= lo + 2) {
      vhi = vlo;
    } else {
      float next = mx;
      for (int c : arcs) {
        const float* col = column(image, c);
        const float* it = std::upper_bound(col, col + kImageSize, flo);
        if (it != col + kImageSize) next = std::min(next, *it);
      }
      vhi = next;
    }
    return vlo + (r - static_cast<double>(lo)) * (vhi - vlo);
  }

  double abs_dev_sum(int image, std::span<const int> arcs, double mu) const {
    double s = 0.0;
    for (int c : arcs) {
      const float* col = column(image, c);
      const double* pre = col_prefix(image, c);
      const auto nlo = static_cast<std::size_t>(
          std::lower_bound(col, col + kImageSize, mu) - col);
      const double below = pre[nlo];
      const double above = pre[kImageSize] - below;
      s += mu * static_cast<double>(nlo) - below;
      s += above - mu * static_cast<double>(kImageSize - nlo);
    }
    return s;
  }

  int n_images_;
  std::vector<float> sorted_;
  std::vector<double> prefix_;
  std::vector<ColAgg> agg_;
};

}  // namespace arcscan

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arcscan {

inline constexpr int kImageSize = 180;              // rows == cols == 180
inline constexpr int kPixelCount = kImageSize * kImageSize;  // 32400

// Five vacancy-deficiency levels of the ZnO nanosurface.
enum class DeficiencyClass : std::uint8_t { d0 = 0, d10, d20, d40, d60 };

inline constexpr int kClassCount = 5;
inline constexpr std::array<int, kClassCount> kDeficiencyPercent{0, 10, 20, 40, 60};

inline int class_index(DeficiencyClass c) { return static_cast<int>(c); }

inline DeficiencyClass class_from_index(int i) {
  if (i < 0 || i >= kClassCount)
    throw std::out_of_range("class index " + std::to_string(i) + " not in [0,4]");
  return static_cast<DeficiencyClass>(i);
}

// One expanded upper-hemisphere ARS image. Row r is the horizontal angle
// beta, column c is the vertical angle alpha, both at 1 degree resolution.
// Pixels are stored row-major as float; intensities are non-negative for
// clean data but may go negative after additive Gaussian noise.
class ArsImage {
 public:
  ArsImage() : pixels_(kPixelCount, 0.0f) {}

  explicit ArsImage(std::vector<float> pixels,
                    std::optional<DeficiencyClass> label = std::nullopt)
      : pixels_(std::move(pixels)), label_(label) {
    if (pixels_.size() != static_cast<std::size_t>(kPixelCount))
      throw std::invalid_argument("ArsImage requires exactly 180x180 pixels");
  }

  float operator()(int r, int c) const { return pixels_[r * kImageSize + c]; }
  float& operator()(int r, int c) { return pixels_[r * kImageSize + c]; }

  std::span<const float> pixels() const { return pixels_; }
  std::span<float> pixels() { return pixels_; }

  std::optional<DeficiencyClass> label() const { return label_; }
  void set_label(std::optional<DeficiencyClass> l) { label_ = l; }

 private:
  std::vector<float> pixels_;
  std::optional<DeficiencyClass> label_;
};

struct ArcAngles {
  double alpha_deg;       // vertical angle of the arc
  double beta_begin_deg;  // horizontal span start
  double beta_end_deg;    // horizontal span end
};

// Column convention: column c holds the latitudinal arc at alpha = c degrees.
// Columns 0..89 carry the beta in [0, 180] half; columns 90..179 carry the
// beta in [0, -180] half, i.e. the second arc of latitude 180 - alpha.
inline ArcAngles arc_to_angles(int arc_index) {
  if (arc_index < 0 || arc_index >= kImageSize)
    throw std::out_of_range("arc index " + std::to_string(arc_index) +
                            " not in [0,179]");
  const double alpha = static_cast<double>(arc_index);
  if (arc_index < 90) return {alpha, 0.0, 180.0};
  return {alpha, 0.0, -180.0};
}

// The arc sharing the latitude of column c sits at alpha = 180 - c, clamped
// into the addressable columns (alpha = 180 itself is not stored).
inline int paired_arc_column(int arc_index) {
  if (arc_index < 0 || arc_index >= kImageSize)
    throw std::out_of_range("arc index out of range");
  return std::min(180 - arc_index, kImageSize - 1);
}

// Ordered, duplicate-free set of arc column indices (the optimization
// variable). Construction canonicalizes: sorts ascending and drops
// duplicates; out-of-range indices are rejected.
class ArcSet {
 public:
  ArcSet() = default;

  explicit ArcSet(std::vector<int> indices) : indices_(std::move(indices)) {
    for (int c : indices_)
      if (c < 0 || c >= kImageSize)
        throw std::out_of_range("arc index " + std::to_string(c) +
                                " not in [0,179]");
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()),
                   indices_.end());
  }

  static ArcSet all() {
    std::vector<int> v(kImageSize);
    for (int c = 0; c < kImageSize; ++c) v[c] = c;
    return ArcSet(std::move(v));
  }

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }

  bool operator==(const ArcSet& o) const { return indices_ == o.indices_; }

 private:
  std::vector<int> indices_;
};

// Concatenation of the selected columns, column order as in the ArcSet,
// row order ascending within each column. Length 180 * |arcs|.
inline std::vector<float> extract_arcs(const ArsImage& image, const ArcSet& arcs) {
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(kImageSize) * arcs.size());
  for (int c : arcs.indices())
    for (int r = 0; r < kImageSize; ++r) out.push_back(image(r, c));
  return out;
}

// Binary sampling mask over the 180x180 grid.
class PointMask {
 public:
  PointMask() : mask_(kPixelCount, 0) {}

  static PointMask from_arcs(const ArcSet& arcs) {
    PointMask m;
    for (int c : arcs.indices())
      for (int r = 0; r < kImageSize; ++r) m.mask_[r * kImageSize + c] = 1;
    m.count_ = kImageSize * arcs.size();
    return m;
  }

  // Point indices are row-major pixel positions r*180 + c.
  static PointMask from_points(std::span<const int> points) {
    PointMask m;
    for (int p : points) {
      if (p < 0 || p >= kPixelCount)
        throw std::out_of_range("point index " + std::to_string(p) +
                                " not in [0,32399]");
      if (!m.mask_[p]) {
        m.mask_[p] = 1;
        ++m.count_;
      }
    }
    return m;
  }

  static PointMask full() {
    PointMask m;
    std::fill(m.mask_.begin(), m.mask_.end(), std::uint8_t{1});
    m.count_ = kPixelCount;
    return m;
  }

  bool at(int r, int c) const { return mask_[r * kImageSize + c] != 0; }
  bool at(int p) const { return mask_[p] != 0; }
  int count() const { return count_; }

  std::vector<int> point_indices() const {
    std::vector<int> pts;
    pts.reserve(count_);
    for (int p = 0; p < kPixelCount; ++p)
      if (mask_[p]) pts.push_back(p);
    return pts;
  }

 private:
  std::vector<std::uint8_t> mask_;
  int count_ = 0;
};

// Values at mask-true positions in row-major order. The result has exactly
// mask.count() entries; sampled statistics must not see the masked-out
// zeros, hence no zero-filled image is returned.
inline std::vector<float> apply_mask(const ArsImage& image, const PointMask& mask) {
  if (mask.count() == 0)
    throw std::invalid_argument("apply_mask: empty mask has no data to sample");
  std::vector<float> out;
  out.reserve(mask.count());
  const auto px = image.pixels();
  for (int p = 0; p < kPixelCount; ++p)
    if (mask.at(p)) out.push_back(px[p]);
  return out;
}

}  // namespace arcscan

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>

#include "arcscan/pipeline.hpp"

namespace arcscan {

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

}  // namespace detail

// Report CSV. Wall-clock seconds are only emitted when `timings` is set;
// the default keeps every output byte a pure function of config and seed.
inline void write_report_csv(const std::string& path,
                             std::span<const ReportRow> rows, bool timings = false) {
  auto out = detail::open_out(path);
  out << "mode,k,intra_rate,noise,repetition,accuracy,points,seconds\n";
  for (const ReportRow& r : rows) {
    out << r.mode << ',' << r.k << ',' << detail::fmt_double(r.intra_rate) << ','
        << r.noise << ',' << r.repetition << ','
        << detail::fmt_double(r.accuracy) << ',' << r.points << ','
        << (timings ? detail::fmt_double(r.seconds, "%.6f") : std::string("0"))
        << '\n';
  }
}

// Selections per repetition, one line each, sorted indices. Latitude
// reports hold arc columns; point-based reports hold row-major pixels.
inline void write_masks(const std::string& path, const RunReport& report) {
  auto out = detail::open_out(path);
  for (std::size_t i = 0; i < report.repetitions.size(); ++i) {
    out << "rep=" << i << " indices=";
    const auto& sel = report.repetitions[i].selection;
    for (std::size_t j = 0; j < sel.size(); ++j) {
      if (j) out << ',';
      out << sel[j];
    }
    out << '\n';
  }
}

// 180x180 grid of counts; latitude heatmaps broadcast the per-arc count
// down each column.
inline void write_heatmap_csv(const std::string& path, const Heatmap& hm) {
  auto out = detail::open_out(path);
  for (int r = 0; r < kImageSize; ++r) {
    for (int c = 0; c < kImageSize; ++c) {
      const long long v = hm.mode == SamplingMode::kLatitude
                              ? hm.counts[c]
                              : hm.counts[r * kImageSize + c];
      if (c) out << ',';
      out << v;
    }
    out << '\n';
  }
}

// Binary 8-bit PGM (P5), linearly scaled so the maximum count maps to 255.
inline void write_heatmap_pgm(const std::string& path, const Heatmap& hm) {
  auto out = detail::open_out(path);
  out << "P5\n" << kImageSize << ' ' << kImageSize << "\n255\n";
  long long max_count = 0;
  for (long long v : hm.counts) max_count = std::max(max_count, v);
  for (int r = 0; r < kImageSize; ++r) {
    for (int c = 0; c < kImageSize; ++c) {
      const long long v = hm.mode == SamplingMode::kLatitude
                              ? hm.counts[c]
                              : hm.counts[r * kImageSize + c];
      const int byte =
          max_count == 0
              ? 0
              : static_cast<int>(std::llround(255.0 * static_cast<double>(v) /
                                              static_cast<double>(max_count)));
      out.put(static_cast<char>(byte));
    }
  }
}

}  // namespace arcscan

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arcscan/image.hpp"

namespace arcscan {

// ARSD container: magic "ARSD1", u32le image count, u32le height, u32le
// width, then per image one u8 class id followed by 180*180 float32le
// pixels in row-major order.

class ArsdError : public std::runtime_error {
 public:
  ArsdError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " +
                           std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

namespace detail {

inline void put_u32le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline void write_arsd(const std::string& path, std::span<const ArsImage> images) {
  std::string buf;
  buf.reserve(5 + 12 + images.size() * (1 + 4 * kPixelCount));
  buf.append("ARSD1");
  detail::put_u32le(buf, static_cast<std::uint32_t>(images.size()));
  detail::put_u32le(buf, kImageSize);
  detail::put_u32le(buf, kImageSize);
  for (const ArsImage& img : images) {
    if (!img.label())
      throw std::invalid_argument("write_arsd: image without class label");
    buf.push_back(static_cast<char>(class_index(*img.label())));
    for (float v : img.pixels()) {
      std::uint32_t u = std::bit_cast<std::uint32_t>(v);
      detail::put_u32le(buf, u);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

inline std::vector<ArsImage> read_arsd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t n = data.size();

  if (n < 5 || std::memcmp(p, "ARSD1", 5) != 0)
    throw ArsdError(path + ": bad magic, expected ARSD1", 0);
  if (n < 17) throw ArsdError(path + ": truncated header", n);
  const std::uint32_t count = detail::get_u32le(p + 5);
  const std::uint32_t height = detail::get_u32le(p + 9);
  const std::uint32_t width = detail::get_u32le(p + 13);
  if (height != kImageSize || width != kImageSize)
    throw ArsdError(path + ": dimensions " + std::to_string(height) + "x" +
                        std::to_string(width) + ", expected 180x180",
                    9);

  const std::size_t record = 1 + 4 * static_cast<std::size_t>(kPixelCount);
  std::size_t off = 17;
  std::vector<ArsImage> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (off + record > n)
      throw ArsdError(path + ": truncated record " + std::to_string(i), off);
    const int cls = p[off];
    if (cls >= kClassCount)
      throw ArsdError(path + ": class id " + std::to_string(cls) +
                          " not in [0,4]",
                      off);
    std::vector<float> px(kPixelCount);
    const unsigned char* q = p + off + 1;
    for (int j = 0; j < kPixelCount; ++j)
      px[j] = std::bit_cast<float>(detail::get_u32le(q + 4 * j));
    images.emplace_back(std::move(px), class_from_index(cls));
    off += record;
  }
  if (off != n)
    throw ArsdError(path + ": trailing bytes after last record", off);
  return images;
}

}  // namespace arcscan

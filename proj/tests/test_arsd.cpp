#include <catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "arcscan/arsd.hpp"

using namespace arcscan;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("arcscan_test_" + name);
}

std::vector<ArsImage> sample_images(int n) {
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  std::vector<ArsImage> images;
  for (int i = 0; i < n; ++i) {
    std::vector<float> px(kPixelCount);
    for (auto& v : px) v = u(gen);
    images.emplace_back(std::move(px), class_from_index(i % kClassCount));
  }
  return images;
}

}  // namespace

TEST_CASE("arsd round-trips bit-exactly") {
  const auto images = sample_images(7);
  const fs::path path = temp_file("roundtrip.arsd");
  write_arsd(path.string(), images);
  const auto back = read_arsd(path.string());
  REQUIRE(back.size() == images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    CHECK(back[i].label() == images[i].label());
    REQUIRE(std::equal(back[i].pixels().begin(), back[i].pixels().end(),
                       images[i].pixels().begin()));
  }
  fs::remove(path);
}

TEST_CASE("arsd header layout is bit-exact") {
  const auto images = sample_images(1);
  const fs::path path = temp_file("header.arsd");
  write_arsd(path.string(), images);
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(data.size() == 5 + 12 + 1 + 4 * std::size_t(kPixelCount));
  CHECK(data.substr(0, 5) == "ARSD1");
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  CHECK((p[5] | p[6] << 8 | p[7] << 16 | p[8] << 24) == 1);    // count
  CHECK((p[9] | p[10] << 8 | p[11] << 16 | p[12] << 24) == 180);
  CHECK((p[13] | p[14] << 8 | p[15] << 16 | p[16] << 24) == 180);
  CHECK(p[17] == 0);  // class id of the first record
  fs::remove(path);
}

TEST_CASE("arsd errors carry byte offsets") {
  const fs::path path = temp_file("bad.arsd");

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOPE!";
  }
  try {
    read_arsd(path.string());
    FAIL("expected ArsdError");
  } catch (const ArsdError& e) {
    CHECK(e.byte_offset() == 0);
  }

  {
    const auto images = sample_images(2);
    write_arsd(path.string(), images);
    fs::resize_file(path, fs::file_size(path) - 100);  // truncate record 1
  }
  try {
    read_arsd(path.string());
    FAIL("expected ArsdError");
  } catch (const ArsdError& e) {
    CHECK(e.byte_offset() == 17 + 1 + 4 * std::size_t(kPixelCount));
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }

  {
    const auto images = sample_images(1);
    write_arsd(path.string(), images);
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(17);
    f.put(static_cast<char>(9));  // invalid class id
  }
  CHECK_THROWS_AS(read_arsd(path.string()), ArsdError);
  fs::remove(path);
}

TEST_CASE("arsd rejects unlabeled images on write") {
  std::vector<ArsImage> images(1);
  const fs::path path = temp_file("unlabeled.arsd");
  CHECK_THROWS_AS(write_arsd(path.string(), images), std::invalid_argument);
}

// Copyright 2026 The sgmreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

#include "core/error.hpp"
#include "core/imaging.hpp"

namespace reid::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sgmreid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline imaging::RasterImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  imaging::RasterImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

inline imaging::RasterImage solid_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  imaging::RasterImage img;
  img.width = w;
  img.height = h;
  for (int i = 0; i < w * h; ++i) img.pixels.insert(img.pixels.end(), {r, g, b});
  return img;
}

inline imaging::ForegroundMask full_mask(int w, int h, std::uint8_t v = 1) {
  return {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, v)};
}

// Runs fn and returns the code of the reid::Error it throws, or 0 if none.
template <typename Fn>
int error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return 0;
}

#define REQUIRE_ERROR(expr, code) \
  CHECK(::reid::testing::error_code_of([&] { (void)(expr); }) == static_cast<int>(code))

}  // namespace reid::testing

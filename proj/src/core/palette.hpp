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

#include <array>
#include <string>

#include <Eigen/Core>

#include "core/imaging.hpp"

namespace reid::sgm {

inline constexpr int kNumColorNames = 16;

/// The color-name vocabulary: 16 RGB reference points in [0,1]^3.
struct ColorNamePalette {
  std::array<Eigen::Vector3d, kNumColorNames> rgb;
  std::array<std::string, kNumColorNames> labels;

  /// The palette points expressed in `space` as a 3x16 matrix, one column
  /// per color name, using the same conversion as image pixels.
  Eigen::Matrix<double, 3, kNumColorNames> in_space(imaging::ColorSpace space) const;
};

/// The built-in palette; identical to data/palette_default.txt.
const ColorNamePalette& default_palette();

/// Parses "label r g b" lines ('#' comments and blank lines skipped).
ColorNamePalette parse_palette(const std::string& text);
ColorNamePalette load_palette(const std::string& path);
std::string format_palette(const ColorNamePalette& palette);

}  // namespace reid::sgm

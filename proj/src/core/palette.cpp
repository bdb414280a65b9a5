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

#include "core/palette.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "core/error.hpp"

namespace reid::sgm {

Eigen::Matrix<double, 3, kNumColorNames> ColorNamePalette::in_space(
    imaging::ColorSpace space) const {
  Eigen::Matrix<double, 3, kNumColorNames> out;
  for (int j = 0; j < kNumColorNames; ++j)
    out.col(j) = imaging::convert_rgb(rgb[j].x(), rgb[j].y(), rgb[j].z(), space);
  return out;
}

const ColorNamePalette& default_palette() {
  static const ColorNamePalette palette = [] {
    struct Entry {
      const char* label;
      double r, g, b;
    };
    static constexpr Entry kEntries[kNumColorNames] = {
        {"black", 0, 0, 0},       {"blue", 0, 0, 1},         {"brown", 0.5, 0.4, 0.25},
        {"gray", 0.5, 0.5, 0.5},  {"green", 0, 1, 0},        {"orange", 1, 0.8, 0},
        {"pink", 1, 0.5, 1},      {"purple", 1, 0, 1},       {"red", 1, 0, 0},
        {"white", 1, 1, 1},       {"yellow", 1, 1, 0},       {"navy", 0, 0, 0.5},
        {"darkgreen", 0, 0.5, 0}, {"maroon", 0.5, 0, 0},     {"cyan", 0, 1, 1},
        {"silver", 0.75, 0.75, 0.75}};
    ColorNamePalette p;
    for (int j = 0; j < kNumColorNames; ++j) {
      p.labels[j] = kEntries[j].label;
      p.rgb[j] = {kEntries[j].r, kEntries[j].g, kEntries[j].b};
    }
    return p;
  }();
  return palette;
}

ColorNamePalette parse_palette(const std::string& text) {
  ColorNamePalette palette;
  std::istringstream in(text);
  std::string line;
  int count = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string label;
    double r, g, b;
    if (!(fields >> label >> r >> g >> b))
      fail(ErrorCode::kCorruptFile, "palette line " + std::to_string(line_no) + ": expected 'label r g b'");
    if (count == kNumColorNames)
      fail(ErrorCode::kCorruptFile, "palette has more than 16 entries");
    for (double c : {r, g, b}) {
      if (!(c >= 0.0 && c <= 1.0))
        fail(ErrorCode::kCorruptFile, "palette line " + std::to_string(line_no) + ": channel outside [0,1]");
    }
    palette.labels[count] = label;
    palette.rgb[count] = {r, g, b};
    ++count;
  }
  if (count != kNumColorNames)
    fail(ErrorCode::kCorruptFile, "palette must have exactly 16 entries, found " + std::to_string(count));
  for (int i = 0; i < kNumColorNames; ++i)
    for (int j = i + 1; j < kNumColorNames; ++j)
      if (palette.rgb[i] == palette.rgb[j])
        fail(ErrorCode::kCorruptFile, "palette entries '" + palette.labels[i] + "' and '" +
                                          palette.labels[j] + "' coincide");
  return palette;
}

ColorNamePalette load_palette(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open palette file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_palette(buffer.str());
}

std::string format_palette(const ColorNamePalette& palette) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (int j = 0; j < kNumColorNames; ++j)
    out << palette.labels[j] << ' ' << palette.rgb[j].x() << ' ' << palette.rgb[j].y() << ' '
        << palette.rgb[j].z() << '\n';
  return out.str();
}

}  // namespace reid::sgm

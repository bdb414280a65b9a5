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
#include <string>
#include <vector>

#include "json.hpp"

#include "core/descriptor.hpp"

namespace reid::descriptor {

inline constexpr std::uint16_t kDescriptorFileVersion = 1;

/// A batch of image representations sharing one layout, stored as float32
/// rows. This is exactly what the descriptor file holds.
struct DescriptorSet {
  std::uint32_t dim = 0;
  std::vector<LayoutRecord> layout;
  std::vector<std::string> source_ids;
  std::vector<float> values;  // count x dim, row-major
  nlohmann::json meta = nlohmann::json::object();

  std::size_t count() const { return source_ids.size(); }
  const float* row(std::size_t i) const { return values.data() + i * dim; }
  /// Row index for a source id, or -1.
  long find(const std::string& source_id) const;
  void append(const ImageRepresentation& rep);

  bool operator==(const DescriptorSet&) const = default;
};

/// Binary layout (little-endian): "SGMD", u16 version, u32 count, u32 dim,
/// count*dim float32, then a JSON footer with layout, source ids and meta.
std::string encode_descriptor_set(const DescriptorSet& set);
DescriptorSet decode_descriptor_set(std::string_view bytes);
void save_descriptor_set(const DescriptorSet& set, const std::string& path);
DescriptorSet load_descriptor_set(const std::string& path);

/// One row per image; header "source_id" followed by layout path strings.
std::string descriptor_set_csv(const DescriptorSet& set);

nlohmann::json layout_to_json(const std::vector<LayoutRecord>& layout);
std::vector<LayoutRecord> layout_from_json(const nlohmann::json& j);

}  // namespace reid::descriptor

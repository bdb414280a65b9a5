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

#include "core/descriptor_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "core/byte_io.hpp"
#include "core/error.hpp"

namespace reid::io {

std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_binary_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoFailure, "cannot create file: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::remove(tmp.c_str());
      fail(ErrorCode::kIoFailure, "write error: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorCode::kIoFailure, "cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

}  // namespace reid::io

namespace reid::descriptor {
namespace {

constexpr std::string_view kMagic = "SGMD";

}  // namespace

long DescriptorSet::find(const std::string& source_id) const {
  for (std::size_t i = 0; i < source_ids.size(); ++i)
    if (source_ids[i] == source_id) return static_cast<long>(i);
  return -1;
}

void DescriptorSet::append(const ImageRepresentation& rep) {
  if (source_ids.empty() && layout.empty()) {
    layout = rep.layout;
    dim = static_cast<std::uint32_t>(rep.values.size());
  }
  if (rep.layout != layout || rep.values.size() != dim)
    fail(ErrorCode::kDimensionMismatch,
         "representation of '" + rep.source_id + "' does not share the set's layout");
  source_ids.push_back(rep.source_id);
  for (double v : rep.values) values.push_back(static_cast<float>(v));
}

nlohmann::json layout_to_json(const std::vector<LayoutRecord>& layout) {
  auto arr = nlohmann::json::array();
  for (const auto& r : layout) {
    arr.push_back({{"kind", feature_kind_name(r.kind)},
                   {"space", r.space >= 0 ? std::string(imaging::color_space_name(
                                                static_cast<imaging::ColorSpace>(r.space)))
                                          : std::string()},
                   {"view", view_name(r.view)},
                   {"stripe", r.stripe},
                   {"length", r.length}});
  }
  return arr;
}

std::vector<LayoutRecord> layout_from_json(const nlohmann::json& j) {
  std::vector<LayoutRecord> layout;
  for (const auto& item : j) {
    LayoutRecord r;
    const auto kind = parse_feature_kind(item.at("kind").get<std::string>());
    if (!kind) fail(ErrorCode::kCorruptFile, "unknown feature kind in layout");
    r.kind = *kind;
    const auto space_name = item.at("space").get<std::string>();
    if (space_name.empty()) {
      r.space = -1;
    } else {
      const auto space = imaging::parse_color_space(space_name);
      if (!space) fail(ErrorCode::kCorruptFile, "unknown color space in layout: " + space_name);
      r.space = static_cast<int>(*space);
    }
    const auto view = item.at("view").get<std::string>();
    if (view != "whole" && view != "foreground") fail(ErrorCode::kCorruptFile, "unknown view in layout");
    r.view = view == "whole" ? View::kWhole : View::kForeground;
    r.stripe = item.at("stripe").get<int>();
    r.length = item.at("length").get<int>();
    if (r.length <= 0) fail(ErrorCode::kCorruptFile, "non-positive layout segment length");
    layout.push_back(r);
  }
  return layout;
}

std::string encode_descriptor_set(const DescriptorSet& set) {
  if (set.values.size() != set.count() * set.dim)
    fail(ErrorCode::kDimensionMismatch, "descriptor set values do not match count x dim");
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u16(kDescriptorFileVersion);
  w.u32(static_cast<std::uint32_t>(set.count()));
  w.u32(set.dim);
  for (float v : set.values) w.f32(v);
  const nlohmann::json footer = {
      {"layout", layout_to_json(set.layout)}, {"source_ids", set.source_ids}, {"meta", set.meta}};
  w.bytes(footer.dump());
  return w.data();
}

DescriptorSet decode_descriptor_set(std::string_view bytes) {
  io::ByteReader r(bytes, "descriptor file");
  if (bytes.size() < 4 || r.bytes(4) != kMagic)
    fail(ErrorCode::kCorruptFile, "descriptor file: bad magic (expected SGMD)");
  const auto version = r.u16();
  if (version != kDescriptorFileVersion)
    fail(ErrorCode::kUnsupportedFormat, "descriptor file: unsupported version " + std::to_string(version));
  const std::uint64_t count = r.u32();
  DescriptorSet set;
  set.dim = r.u32();
  if (count * set.dim * 4 > r.remaining())
    fail(ErrorCode::kCorruptFile, "descriptor file: header claims " + std::to_string(count) + " x " +
                                      std::to_string(set.dim) + " values but the payload is shorter");
  set.values.resize(count * set.dim);
  for (float& v : set.values) v = r.f32();

  nlohmann::json footer;
  try {
    footer = nlohmann::json::parse(r.rest());
    set.layout = layout_from_json(footer.at("layout"));
    set.source_ids = footer.at("source_ids").get<std::vector<std::string>>();
    set.meta = footer.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorruptFile, std::string("descriptor file: malformed footer: ") + e.what());
  }
  if (set.source_ids.size() != count)
    fail(ErrorCode::kCorruptFile, "descriptor file: footer lists " + std::to_string(set.source_ids.size()) +
                                      " source ids for " + std::to_string(count) + " rows");
  if (layout_length(set.layout) != set.dim)
    fail(ErrorCode::kCorruptFile, "descriptor file: layout covers " + std::to_string(layout_length(set.layout)) +
                                      " dims, header says " + std::to_string(set.dim));
  return set;
}

void save_descriptor_set(const DescriptorSet& set, const std::string& path) {
  io::write_binary_file(path, encode_descriptor_set(set));
}

DescriptorSet load_descriptor_set(const std::string& path) {
  return decode_descriptor_set(io::read_binary_file(path));
}

std::string descriptor_set_csv(const DescriptorSet& set) {
  std::ostringstream out;
  out << "source_id";
  for (const auto& p : layout_paths(set.layout)) out << ',' << p;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < set.count(); ++i) {
    out << set.source_ids[i];
    const float* row = set.row(i);
    for (std::uint32_t j = 0; j < set.dim; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(row[j]));
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace reid::descriptor

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

#include "core/byte_io.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"

namespace reid::pipeline {
namespace {

constexpr std::string_view kMagic = "CCLM";

void put_vector(io::ByteWriter& w, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v[i]);
}

void put_matrix(io::ByteWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
}

Eigen::VectorXd get_vector(io::ByteReader& r, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = r.f64();
  return v;
}

Eigen::MatrixXd get_matrix(io::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
  return m;
}

}  // namespace

std::string encode_model(const ModelBundle& b) {
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u16(kModelFileVersion);
  w.u32(static_cast<std::uint32_t>(b.parts.size()));
  w.u32(b.descriptor_dim);
  w.f64(b.ridge);
  w.u64(b.pair_count);
  w.u64(b.split_seed);
  w.u32(b.split_index);
  w.f64(b.split_fraction);
  for (const auto& p : b.parts) {
    const auto& m = p.model;
    w.u32(static_cast<std::uint32_t>(p.kind));
    w.u32(p.offset);
    w.u32(static_cast<std::uint32_t>(m.dim()));
    w.u32(static_cast<std::uint32_t>(m.rank()));
    w.u32(p.requested_rank);
    put_vector(w, m.mean_x);
    put_vector(w, m.mean_y);
    put_matrix(w, m.w);
    put_vector(w, m.eigenvalues);
    put_matrix(w, m.proj_sigma_m_inv);
    put_matrix(w, m.proj_sigma_e_inv);
    put_matrix(w, m.proj_sigma_inv);
  }
  return w.data();
}

ModelBundle decode_model(std::string_view bytes) {
  io::ByteReader r(bytes, "model file");
  if (bytes.size() < 4 || r.bytes(4) != kMagic)
    fail(ErrorCode::kCorruptFile, "model file: bad magic (expected CCLM)");
  const auto version = r.u16();
  if (version != kModelFileVersion)
    fail(ErrorCode::kUnsupportedFormat, "model file: unsupported version " + std::to_string(version));
  ModelBundle b;
  const std::uint32_t parts = r.u32();
  b.descriptor_dim = r.u32();
  b.ridge = r.f64();
  b.pair_count = r.u64();
  b.split_seed = r.u64();
  b.split_index = r.u32();
  b.split_fraction = r.f64();
  if (parts == 0 || parts > 64) fail(ErrorCode::kCorruptFile, "model file: implausible part count");
  for (std::uint32_t i = 0; i < parts; ++i) {
    ModelPart p;
    p.kind = static_cast<std::int32_t>(r.u32());
    if (p.kind < kJointPart || p.kind > static_cast<int>(descriptor::FeatureKind::kSiltp))
      fail(ErrorCode::kCorruptFile, "model file: unknown part kind");
    p.offset = r.u32();
    const std::uint64_t d = r.u32();
    const std::uint64_t rank = r.u32();
    p.requested_rank = r.u32();
    p.length = static_cast<std::uint32_t>(d);
    if (d == 0 || rank == 0 || rank > d || p.offset + d > b.descriptor_dim)
      fail(ErrorCode::kCorruptFile, "model file: inconsistent dimensions d=" + std::to_string(d) +
                                        " r=" + std::to_string(rank));
    if ((2 * d + d * rank + rank + 3 * rank * rank) * 8 > r.remaining())
      fail(ErrorCode::kCorruptFile, "model file: payload shorter than its dimensions require");
    auto& m = p.model;
    const auto di = static_cast<Eigen::Index>(d);
    const auto ri = static_cast<Eigen::Index>(rank);
    m.mean_x = get_vector(r, di);
    m.mean_y = get_vector(r, di);
    m.w = get_matrix(r, di, ri);
    m.eigenvalues = get_vector(r, ri);
    m.proj_sigma_m_inv = get_matrix(r, ri, ri);
    m.proj_sigma_e_inv = get_matrix(r, ri, ri);
    m.proj_sigma_inv = get_matrix(r, ri, ri);
    m.prepare_scoring();
    b.parts.push_back(std::move(p));
  }
  if (r.remaining() != 0) fail(ErrorCode::kCorruptFile, "model file: trailing bytes");
  return b;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
  io::write_binary_file(path, encode_model(bundle));
}

ModelBundle load_model(const std::string& path) { return decode_model(io::read_binary_file(path)); }

}  // namespace reid::pipeline

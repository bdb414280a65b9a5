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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/ccl.hpp"
#include "core/descriptor.hpp"
#include "core/descriptor_io.hpp"
#include "core/evalkit.hpp"

namespace reid::pipeline {

inline constexpr std::uint16_t kModelFileVersion = 1;
/// Part kind for a single model over the whole fused vector.
inline constexpr int kJointPart = -1;

/// One CCL model over a contiguous slice of the descriptor vector.
struct ModelPart {
  int kind = kJointPart;  // FeatureKind value or kJointPart
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
  std::uint32_t requested_rank = 0;
  ccl::CclModel model;
};

/// Per-feature CCL models whose Eq.-10 style scores are summed.
struct ModelBundle {
  std::uint32_t descriptor_dim = 0;
  double ridge = ccl::kDefaultRidge;
  std::uint64_t pair_count = 0;
  std::uint64_t split_seed = 0;
  std::uint32_t split_index = 0;
  double split_fraction = 0.5;
  std::vector<ModelPart> parts;

  /// Projections of one descriptor row, one vector per part.
  std::vector<Eigen::VectorXd> project(const float* row, ccl::CameraView view) const;
  double score(const std::vector<Eigen::VectorXd>& probe,
               const std::vector<Eigen::VectorXd>& gallery) const;
};

/// Binary layout (little-endian): "CCLM", u16 version, u32 part count,
/// u32 descriptor dim, f64 ridge, u64 pair count, u64 split seed,
/// u32 split index, f64 split fraction; then per part: i32 kind,
/// u32 offset, u32 d, u32 r, u32 requested r, f64 mean_x[d], f64 mean_y[d],
/// f64 W[d*r] row-major, f64 eigenvalues[r], and the three r*r inverse
/// matrices (commonness, difference, pooled) row-major.
std::string encode_model(const ModelBundle& bundle);
ModelBundle decode_model(std::string_view bytes);
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

struct TrainConfig {
  int r = ccl::kDefaultRank;
  double ridge = ccl::kDefaultRidge;
  bool per_feature = true;
};

/// Contiguous [offset, offset+length) slice per feature kind, in layout order.
struct FeatureSegment {
  descriptor::FeatureKind kind;
  std::uint32_t offset;
  std::uint32_t length;
};
std::vector<FeatureSegment> feature_segments(const std::vector<descriptor::LayoutRecord>& layout);

/// Rows of `set` for the manifest entries of the given persons and camera,
/// matched through source id == manifest image path.
struct ViewRows {
  std::vector<std::size_t> rows;
  std::vector<std::string> ids;
};
ViewRows rows_for(const descriptor::DescriptorSet& set, const evalkit::DatasetManifest& manifest,
                  const std::vector<std::string>& person_ids, evalkit::Camera camera);

struct TrainResult {
  ModelBundle bundle;
  std::vector<std::string> warnings;
};

/// Trains on every cross-view image pair of the split's training persons.
TrainResult train(const descriptor::DescriptorSet& set, const evalkit::DatasetManifest& manifest,
                  const evalkit::SplitSpec& split, double split_fraction, const TrainConfig& config);

enum class Protocol : int { kSingleShot = 0, kMultiShot = 1 };

struct EvalOptions {
  Protocol protocol = Protocol::kSingleShot;
  evalkit::Camera probe_camera = evalkit::Camera::kA;
  int threads = 1;
};

/// Probes of the split's test persons from one camera, gallery from the other.
Eigen::MatrixXd score_test_split(const descriptor::DescriptorSet& set,
                                 const evalkit::DatasetManifest& manifest, const ModelBundle& bundle,
                                 const evalkit::SplitSpec& split, const EvalOptions& options,
                                 std::vector<std::string>& probe_ids,
                                 std::vector<std::string>& gallery_ids);

evalkit::CmcCurve evaluate(const descriptor::DescriptorSet& set,
                           const evalkit::DatasetManifest& manifest, const ModelBundle& bundle,
                           const evalkit::SplitSpec& split, const EvalOptions& options);

/// Same protocol without any learning: negative squared Euclidean distance
/// between raw descriptors.
evalkit::CmcCurve evaluate_euclidean(const descriptor::DescriptorSet& set,
                                     const evalkit::DatasetManifest& manifest,
                                     const evalkit::SplitSpec& split, const EvalOptions& options);

/// Trains and evaluates on every split.
std::vector<evalkit::CmcCurve> run_splits(const descriptor::DescriptorSet& set,
                                          const evalkit::DatasetManifest& manifest,
                                          const std::vector<evalkit::SplitSpec>& splits,
                                          double split_fraction, const TrainConfig& config,
                                          const EvalOptions& options);

/// Raises ArtifactMismatch when the model cannot score rows of `set`.
void check_compatible(const descriptor::DescriptorSet& set, const ModelBundle& bundle);

struct ExtractionTiming {
  std::size_t images = 0;
  double mean_seconds = 0.0;
  double p95_seconds = 0.0;
};

/// Extracts every manifest row (source id = image path) with up to
/// `threads` workers. Failures are collected and reported together.
descriptor::DescriptorSet extract_manifest(const evalkit::DatasetManifest& manifest,
                                           const descriptor::ExtractionConfig& config,
                                           int threads, ExtractionTiming* timing = nullptr);

nlohmann::json config_to_json(const descriptor::ExtractionConfig& config);

}  // namespace reid::pipeline

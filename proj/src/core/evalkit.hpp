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

#include <Eigen/Core>

#include "core/ccl.hpp"

namespace reid::evalkit {

enum class Camera : int { kA = 0, kB = 1 };

struct ManifestEntry {
  std::string person_id;
  Camera camera = Camera::kA;
  std::string image_path;
  std::string mask_path;  // empty when absent
};

/// CSV: "person_id,camera,image_path,mask_path". Relative paths resolve
/// against `base_dir` (the manifest's directory).
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;

  /// Distinct person ids in first-appearance order.
  std::vector<std::string> person_ids() const;
  std::string resolve(const std::string& path) const;
  /// Every id must appear under both cameras.
  void validate() const;
};

DatasetManifest parse_manifest(const std::string& text, const std::string& base_dir = "");
DatasetManifest load_manifest(const std::string& path);
std::string format_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

struct SplitSpec {
  std::uint64_t seed = 0;
  int index = 0;
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
};

/// Person-level random partitions; split i is a pure function of
/// (ids, fraction, seed, i).
std::vector<SplitSpec> make_splits(const DatasetManifest& manifest, double fraction, int n_splits,
                                   std::uint64_t seed);
std::vector<SplitSpec> make_splits(const std::vector<std::string>& ids, double fraction,
                                   int n_splits, std::uint64_t seed);

struct CmcCurve {
  std::vector<double> rates;  // rates[k]: fraction matched within rank k+1

  double at_rank(int rank) const;
};

/// Scores are probes x gallery, higher = more similar. Gallery ids must be
/// unique; ties rank the lower gallery index first.
CmcCurve cmc_single_shot(const Eigen::MatrixXd& scores, const std::vector<std::string>& probe_ids,
                         const std::vector<std::string>& gallery_ids);

/// Gallery may hold several images per identity; an identity scores the
/// max over its images. Each probe image is ranked against identities.
CmcCurve cmc_multi_shot(const Eigen::MatrixXd& scores, const std::vector<std::string>& probe_ids,
                        const std::vector<std::string>& gallery_ids);

/// Camera A projections probe, camera B projections form the gallery.
CmcCurve evaluate_single_shot(const ccl::CclModel& model,
                              const std::vector<Eigen::VectorXd>& probes,
                              const std::vector<std::string>& probe_ids,
                              const std::vector<Eigen::VectorXd>& gallery,
                              const std::vector<std::string>& gallery_ids);
CmcCurve evaluate_multi_shot(const ccl::CclModel& model, const std::vector<Eigen::VectorXd>& probes,
                             const std::vector<std::string>& probe_ids,
                             const std::vector<Eigen::VectorXd>& gallery,
                             const std::vector<std::string>& gallery_ids);

struct Report {
  std::vector<int> ranks;
  std::vector<double> mean_rates;
  int curves = 0;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Mean matching rate at each rank across curves.
Report report(const std::vector<CmcCurve>& curves, const std::vector<int>& ranks);

struct SynthSpec {
  int n_ids = 100;
  int images_per_view = 1;
  int width = 48;
  int height = 128;
  int min_regions = 2;
  int max_regions = 2;
  double stripe_probability = 0.3;  // chance a clothing region is striped
  double view_gain = 0.5;           // camera B diagonal gain deviation
  double view_mixing = 0.3;         // camera B off-diagonal channel mixing
  double view_offset = 0.15;        // camera B additive shift, [0,1] units
  double color_variation = 0.04;    // per-image clothing color shift sigma, [0,1] units
  int clutter_blobs = 4;            // random colored background rectangles per image
  double noise = 8.0;               // Gaussian pixel noise sigma, 8-bit units
  double illumination = 0.1;        // per-image brightness gain deviation
  int jitter = 2;                   // per-image body shift, pixels
  std::uint64_t seed = 20260101;

  /// Zero-noise, identity-transform variant of this spec.
  SynthSpec clean() const;
};

SynthSpec parse_synth_spec(const std::string& text);
std::string format_synth_spec(const SynthSpec& spec);

/// Writes cam_a/ and cam_b/ PPM images, PGM masks and manifest.csv into
/// out_dir; returns the manifest. Deterministic given the spec.
DatasetManifest synth_dataset(const SynthSpec& spec, const std::string& out_dir);

}  // namespace reid::evalkit

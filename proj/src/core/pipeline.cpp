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

#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"

namespace reid::pipeline {
namespace {

using descriptor::DescriptorSet;
using evalkit::Camera;
using evalkit::DatasetManifest;

Eigen::VectorXd slice(const float* row, std::uint32_t offset, std::uint32_t length) {
  Eigen::VectorXd v(length);
  for (std::uint32_t i = 0; i < length; ++i) v[i] = static_cast<double>(row[offset + i]);
  return v;
}

ccl::CameraView view_of(Camera camera) {
  return camera == Camera::kA ? ccl::CameraView::kA : ccl::CameraView::kB;
}

Camera other(Camera camera) { return camera == Camera::kA ? Camera::kB : Camera::kA; }

std::string part_name(int kind) {
  return kind == kJointPart ? std::string("joint")
                            : descriptor::feature_kind_name(static_cast<descriptor::FeatureKind>(kind));
}

Eigen::MatrixXd scores_from(const std::vector<std::vector<Eigen::VectorXd>>& probes,
                            const std::vector<std::vector<Eigen::VectorXd>>& gallery,
                            const ModelBundle& bundle, int threads) {
  const auto rows = static_cast<Eigen::Index>(probes.size());
  const auto cols = static_cast<Eigen::Index>(gallery.size());
  Eigen::MatrixXd out(rows, cols);
  std::atomic<Eigen::Index> next{0};
  auto work = [&] {
    for (Eigen::Index i = next++; i < rows; i = next++)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = bundle.score(probes[i], gallery[j]);
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(rows)));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

evalkit::CmcCurve cmc_for(const Eigen::MatrixXd& scores, const std::vector<std::string>& probe_ids,
                          const std::vector<std::string>& gallery_ids, Protocol protocol) {
  return protocol == Protocol::kSingleShot ? evalkit::cmc_single_shot(scores, probe_ids, gallery_ids)
                                           : evalkit::cmc_multi_shot(scores, probe_ids, gallery_ids);
}

}  // namespace

std::vector<Eigen::VectorXd> ModelBundle::project(const float* row, ccl::CameraView view) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(parts.size());
  for (const auto& p : parts) out.push_back(ccl::project(p.model, slice(row, p.offset, p.length), view));
  return out;
}

double ModelBundle::score(const std::vector<Eigen::VectorXd>& probe,
                          const std::vector<Eigen::VectorXd>& gallery) const {
  double total = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) total += ccl::score(parts[i].model, probe[i], gallery[i]);
  return total;
}

std::vector<FeatureSegment> feature_segments(const std::vector<descriptor::LayoutRecord>& layout) {
  std::vector<FeatureSegment> segments;
  std::uint32_t offset = 0;
  for (const auto& r : layout) {
    if (segments.empty() || segments.back().kind != r.kind) {
      for (const auto& s : segments)
        if (s.kind == r.kind)
          fail(ErrorCode::kArtifactMismatch, std::string("feature ") + descriptor::feature_kind_name(r.kind) +
                                                 " is not contiguous in the layout");
      segments.push_back({r.kind, offset, 0});
    }
    segments.back().length += static_cast<std::uint32_t>(r.length);
    offset += static_cast<std::uint32_t>(r.length);
  }
  return segments;
}

ViewRows rows_for(const DescriptorSet& set, const DatasetManifest& manifest,
                  const std::vector<std::string>& person_ids, Camera camera) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < set.count(); ++i) row_of.emplace(set.source_ids[i], i);
  const std::unordered_set<std::string> wanted(person_ids.begin(), person_ids.end());
  ViewRows out;
  for (const auto& e : manifest.entries) {
    if (e.camera != camera || !wanted.count(e.person_id)) continue;
    const auto it = row_of.find(e.image_path);
    if (it == row_of.end())
      fail(ErrorCode::kArtifactMismatch, "descriptor file has no row for image " + e.image_path);
    out.rows.push_back(it->second);
    out.ids.push_back(e.person_id);
  }
  return out;
}

TrainResult train(const DescriptorSet& set, const DatasetManifest& manifest,
                  const evalkit::SplitSpec& split, double split_fraction, const TrainConfig& config) {
  if (config.r < 1) fail(ErrorCode::kInvalidArgument, "r must be positive");
  TrainResult result;
  auto& bundle = result.bundle;
  bundle.descriptor_dim = set.dim;
  bundle.ridge = config.ridge;
  bundle.split_seed = split.seed;
  bundle.split_index = static_cast<std::uint32_t>(split.index);
  bundle.split_fraction = split_fraction;

  std::vector<std::pair<int, FeatureSegment>> plan;
  if (config.per_feature) {
    for (const auto& s : feature_segments(set.layout)) plan.push_back({static_cast<int>(s.kind), s});
  } else {
    plan.push_back({kJointPart, {descriptor::FeatureKind::kSgm, 0, set.dim}});
  }

  // Every cross-view image pair of the same training person.
  const auto a = rows_for(set, manifest, split.train_ids, Camera::kA);
  const auto b = rows_for(set, manifest, split.train_ids, Camera::kB);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t j = 0; j < b.rows.size(); ++j)
      if (a.ids[i] == b.ids[j]) pairs.emplace_back(a.rows[i], b.rows[j]);
  if (pairs.size() < 2)
    fail(ErrorCode::kTooFewPairs, "training split yields " + std::to_string(pairs.size()) + " matched pairs");
  bundle.pair_count = pairs.size();

  for (const auto& [kind, seg] : plan) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.size()), seg.length);
    Eigen::MatrixXd y(x.rows(), seg.length);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      x.row(static_cast<Eigen::Index>(p)) = slice(set.row(pairs[p].first), seg.offset, seg.length).transpose();
      y.row(static_cast<Eigen::Index>(p)) = slice(set.row(pairs[p].second), seg.offset, seg.length).transpose();
    }
    int rank = config.r;
    if (rank > static_cast<int>(seg.length)) {
      result.warnings.push_back("requested r=" + std::to_string(config.r) + " exceeds the " +
                                std::to_string(seg.length) + " dims of " + part_name(kind) +
                                "; clamped to " + std::to_string(seg.length));
      rank = static_cast<int>(seg.length);
    }
    ModelPart part;
    part.kind = kind;
    part.offset = seg.offset;
    part.length = seg.length;
    part.requested_rank = static_cast<std::uint32_t>(config.r);
    part.model = ccl::solve_subspace(ccl::accumulate_stats(x, y, config.ridge), rank);
    bundle.parts.push_back(std::move(part));
  }
  return result;
}

void check_compatible(const DescriptorSet& set, const ModelBundle& bundle) {
  if (set.dim != bundle.descriptor_dim)
    fail(ErrorCode::kArtifactMismatch, "model expects descriptors of dim " + std::to_string(bundle.descriptor_dim) +
                                           " but the descriptor file has dim " + std::to_string(set.dim));
  const auto segments = feature_segments(set.layout);
  for (const auto& p : bundle.parts) {
    if (p.kind == kJointPart) continue;
    const auto it = std::find_if(segments.begin(), segments.end(), [&](const FeatureSegment& s) {
      return static_cast<int>(s.kind) == p.kind;
    });
    if (it == segments.end() || it->offset != p.offset || it->length != p.length)
      fail(ErrorCode::kArtifactMismatch, "model part " + part_name(p.kind) + " covers dims [" +
                                             std::to_string(p.offset) + "," + std::to_string(p.offset + p.length) +
                                             ") which the descriptor layout does not match");
  }
}

Eigen::MatrixXd score_test_split(const DescriptorSet& set, const DatasetManifest& manifest,
                                 const ModelBundle& bundle, const evalkit::SplitSpec& split,
                                 const EvalOptions& options, std::vector<std::string>& probe_ids,
                                 std::vector<std::string>& gallery_ids) {
  check_compatible(set, bundle);
  const auto probes = rows_for(set, manifest, split.test_ids, options.probe_camera);
  const auto gallery = rows_for(set, manifest, split.test_ids, other(options.probe_camera));
  std::vector<std::vector<Eigen::VectorXd>> pp, gp;
  for (std::size_t r : probes.rows) pp.push_back(bundle.project(set.row(r), view_of(options.probe_camera)));
  for (std::size_t r : gallery.rows) gp.push_back(bundle.project(set.row(r), view_of(other(options.probe_camera))));
  probe_ids = probes.ids;
  gallery_ids = gallery.ids;
  return scores_from(pp, gp, bundle, options.threads);
}

evalkit::CmcCurve evaluate(const DescriptorSet& set, const DatasetManifest& manifest,
                           const ModelBundle& bundle, const evalkit::SplitSpec& split,
                           const EvalOptions& options) {
  std::vector<std::string> probe_ids, gallery_ids;
  const auto scores = score_test_split(set, manifest, bundle, split, options, probe_ids, gallery_ids);
  return cmc_for(scores, probe_ids, gallery_ids, options.protocol);
}

evalkit::CmcCurve evaluate_euclidean(const DescriptorSet& set, const DatasetManifest& manifest,
                                     const evalkit::SplitSpec& split, const EvalOptions& options) {
  const auto probes = rows_for(set, manifest, split.test_ids, options.probe_camera);
  const auto gallery = rows_for(set, manifest, split.test_ids, other(options.probe_camera));
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(probes.rows.size()),
                         static_cast<Eigen::Index>(gallery.rows.size()));
  for (std::size_t i = 0; i < probes.rows.size(); ++i) {
    const Eigen::VectorXd x = slice(set.row(probes.rows[i]), 0, set.dim);
    for (std::size_t j = 0; j < gallery.rows.size(); ++j)
      scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          -(x - slice(set.row(gallery.rows[j]), 0, set.dim)).squaredNorm();
  }
  return cmc_for(scores, probes.ids, gallery.ids, options.protocol);
}

std::vector<evalkit::CmcCurve> run_splits(const DescriptorSet& set, const DatasetManifest& manifest,
                                          const std::vector<evalkit::SplitSpec>& splits,
                                          double split_fraction, const TrainConfig& config,
                                          const EvalOptions& options) {
  std::vector<evalkit::CmcCurve> curves;
  for (const auto& split : splits) {
    const auto trained = train(set, manifest, split, split_fraction, config);
    curves.push_back(evaluate(set, manifest, trained.bundle, split, options));
  }
  return curves;
}

nlohmann::json config_to_json(const descriptor::ExtractionConfig& config) {
  std::vector<std::string> spaces, features;
  for (auto s : config.spaces) spaces.emplace_back(imaging::color_space_name(s));
  for (auto f : config.features) features.emplace_back(descriptor::feature_kind_name(f));
  return {{"k", config.k},
          {"stripes", config.stripes},
          {"spaces", spaces},
          {"use_mask", config.use_mask},
          {"epsilon0", config.epsilon0},
          {"features", features},
          {"covariance", descriptor::covariance_mode_name(config.covariance)},
          {"histogram_bins", config.histogram_bins},
          {"siltp_tau", config.siltp_tau},
          {"palette", sgm::format_palette(config.palette)}};
}

DescriptorSet extract_manifest(const DatasetManifest& manifest,
                               const descriptor::ExtractionConfig& config_in, int threads,
                               ExtractionTiming* timing) {
  config_in.validate();
  descriptor::ExtractionConfig config = config_in;
  const std::size_t n = manifest.entries.size();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "manifest has no entries");

  struct Loaded {
    imaging::RasterImage image;
    std::optional<imaging::ForegroundMask> mask;
  };
  auto load = [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    Loaded l;
    l.image = imaging::load_image(manifest.resolve(e.image_path));
    if (config.use_mask && !e.mask_path.empty())
      l.mask = imaging::load_mask(manifest.resolve(e.mask_path), l.image);
    return l;
  };

  std::vector<std::string> errors(n);
  std::vector<ErrorCode> codes(n, ErrorCode::kIoFailure);
  std::vector<char> failed(n, 0);
  auto record_failure = [&](std::size_t i, ErrorCode code, const std::string& what) {
    failed[i] = 1;
    codes[i] = code;
    errors[i] = manifest.entries[i].image_path + ": " + what;
  };

  if (config.covariance == descriptor::CovarianceMode::kGlobal && !config.global_models) {
    std::vector<Loaded> all;
    all.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      try {
        all.push_back(load(i));
      } catch (const Error& e) {
        record_failure(i, e.code(), e.what());
      }
    }
    if (std::find(failed.begin(), failed.end(), 1) == failed.end()) {
      std::vector<const imaging::RasterImage*> images;
      std::vector<const imaging::ForegroundMask*> masks;
      for (const auto& l : all) {
        images.push_back(&l.image);
        masks.push_back(l.mask ? &*l.mask : nullptr);
      }
      config.global_models = descriptor::fit_global_models(images, masks, config);
    }
  }

  std::vector<descriptor::ImageRepresentation> reps(n);
  std::vector<double> seconds(n, 0.0);
  if (std::find(failed.begin(), failed.end(), 1) == failed.end()) {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          const Loaded l = load(i);
          const auto t0 = std::chrono::steady_clock::now();
          reps[i] = descriptor::extract(l.image, l.mask ? &*l.mask : nullptr, config,
                                        manifest.entries[i].image_path);
          seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } catch (const Error& e) {
          record_failure(i, e.code(), e.what());
        } catch (const std::exception& e) {
          record_failure(i, ErrorCode::kNumericFailure, e.what());
        }
      }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
  }

  std::size_t n_failed = 0;
  std::string listing;
  ErrorCode first_code = ErrorCode::kIoFailure;
  for (std::size_t i = 0; i < n; ++i) {
    if (!failed[i]) continue;
    if (n_failed++ == 0) first_code = codes[i];
    listing += "\n  " + errors[i];
  }
  if (n_failed > 0)
    fail(first_code, "failed to extract " + std::to_string(n_failed) + " of " + std::to_string(n) +
                         " images:" + listing);

  DescriptorSet set;
  for (const auto& rep : reps) set.append(rep);
  set.meta = config_to_json(config_in);

  if (timing != nullptr) {
    timing->images = n;
    double sum = 0.0;
    for (double s : seconds) sum += s;
    timing->mean_seconds = sum / static_cast<double>(n);
    std::vector<double> sorted = seconds;
    std::sort(sorted.begin(), sorted.end());
    const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n))) - 1;
    timing->p95_seconds = sorted[std::min(idx, n - 1)];
  }
  return set;
}

}  // namespace reid::pipeline

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

#include "reid/reid.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core/byte_io.hpp"
#include "core/descriptor.hpp"
#include "core/descriptor_io.hpp"
#include "core/error.hpp"
#include "core/evalkit.hpp"
#include "core/imaging.hpp"
#include "core/palette.hpp"
#include "core/pipeline.hpp"
#include "json.hpp"

struct reid_config {
  reid::descriptor::ExtractionConfig value;
  std::string palette_path;
};
struct reid_manifest {
  reid::evalkit::DatasetManifest value;
};
struct reid_descriptors {
  reid::descriptor::DescriptorSet value;
};
struct reid_model {
  reid::pipeline::ModelBundle value;
};
struct reid_report {
  std::vector<reid::evalkit::CmcCurve> curves;
  reid::evalkit::Report table;
};

namespace {

using reid::ErrorCode;
using reid::fail;
using nlohmann::json;

thread_local std::string g_last_error;

template <typename Fn>
reid_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return REID_OK;
  } catch (const reid::Error& e) {
    g_last_error = e.what();
    return static_cast<reid_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return REID_E_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return REID_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return REID_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kInvalidArgument, key + " expects an integer, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kInvalidArgument, key + " expects a number, got '" + v + "'");
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(ErrorCode::kInvalidArgument, key + " expects a boolean, got '" + v + "'");
}

reid::evalkit::SplitSpec pick_split(const reid::evalkit::DatasetManifest& manifest,
                                    const reid_split& s) {
  if (s.index < 0) fail(ErrorCode::kInvalidArgument, "split index must be non-negative");
  return reid::evalkit::make_splits(manifest, s.fraction, s.index + 1, s.seed)
      .at(static_cast<std::size_t>(s.index));
}

reid::evalkit::Camera camera_of(reid_camera c) {
  if (c != REID_CAMERA_A && c != REID_CAMERA_B) fail(ErrorCode::kInvalidArgument, "unknown camera");
  return c == REID_CAMERA_A ? reid::evalkit::Camera::kA : reid::evalkit::Camera::kB;
}

json describe_set(const reid::descriptor::DescriptorSet& set) {
  json segments = json::array();
  for (const auto& s : reid::pipeline::feature_segments(set.layout))
    segments.push_back({{"feature", reid::descriptor::feature_kind_name(s.kind)},
                        {"offset", s.offset},
                        {"length", s.length}});
  return {{"type", "descriptors"},
          {"format_version", reid::descriptor::kDescriptorFileVersion},
          {"count", set.count()},
          {"dim", set.dim},
          {"segments", segments},
          {"config", set.meta}};
}

json describe_model(const reid::pipeline::ModelBundle& b) {
  json parts = json::array();
  for (const auto& p : b.parts) {
    std::vector<double> head;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(5, p.model.eigenvalues.size()); ++i)
      head.push_back(p.model.eigenvalues[i]);
    parts.push_back({{"feature", p.kind == reid::pipeline::kJointPart
                                     ? std::string("joint")
                                     : reid::descriptor::feature_kind_name(
                                           static_cast<reid::descriptor::FeatureKind>(p.kind))},
                     {"offset", p.offset},
                     {"dim", p.length},
                     {"rank", p.model.rank()},
                     {"requested_rank", p.requested_rank},
                     {"eigenvalues_head", head}});
  }
  return {{"type", "model"},
          {"format_version", reid::pipeline::kModelFileVersion},
          {"descriptor_dim", b.descriptor_dim},
          {"ridge", b.ridge},
          {"pair_count", b.pair_count},
          {"split", {{"seed", b.split_seed}, {"index", b.split_index}, {"fraction", b.split_fraction}}},
          {"parts", parts}};
}

}  // namespace

extern "C" {

const char* reid_version(void) { return "1.0.0"; }

const char* reid_last_error(void) { return g_last_error.c_str(); }

const char* reid_status_name(reid_status status) {
  switch (status) {
    case REID_OK: return "Ok";
    case REID_E_OUT_OF_MEMORY: return "OutOfMemory";
    case REID_E_INTERNAL: return "Internal";
    default:
      if (status >= REID_E_INVALID_ARGUMENT && status <= REID_E_NUMERIC_FAILURE)
        return reid::error_code_name(static_cast<ErrorCode>(status));
      return "Unknown";
  }
}

void reid_string_free(char* s) { std::free(s); }

void reid_train_options_init(reid_train_options* o) {
  if (o == nullptr) return;
  o->r = reid::ccl::kDefaultRank;
  o->ridge = reid::ccl::kDefaultRidge;
  o->per_feature = 1;
  o->split = {0, 0.5, 0};
}

void reid_eval_options_init(reid_eval_options* o) {
  if (o == nullptr) return;
  o->protocol = REID_SINGLE_SHOT;
  o->probe_camera = REID_CAMERA_A;
  o->method = REID_METHOD_CCL;
  o->n_splits = 10;
  o->threads = 1;
  o->split = {0, 0.5, 0};
  o->r = reid::ccl::kDefaultRank;
  o->ridge = reid::ccl::kDefaultRidge;
  o->per_feature = 1;
}

reid_status reid_config_create(reid_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new reid_config();
  });
}

void reid_config_destroy(reid_config* config) { delete config; }

reid_status reid_config_set(reid_config* config, const char* key_c, const char* value_c) {
  return guarded([&] {
    require(config, "config");
    require(key_c, "key");
    require(value_c, "value");
    const std::string key = key_c, v = value_c;
    auto next = config->value;
    if (key == "k") {
      next.k = parse_int(key, v);
    } else if (key == "stripes") {
      next.stripes = parse_int(key, v);
    } else if (key == "spaces") {
      next.spaces.clear();
      for (const auto& name : split_list(v)) {
        const auto s = reid::imaging::parse_color_space(name);
        if (!s) fail(ErrorCode::kInvalidArgument, "unknown color space '" + name + "'");
        next.spaces.push_back(*s);
      }
    } else if (key == "use_mask") {
      next.use_mask = parse_flag(key, v);
    } else if (key == "epsilon0") {
      next.epsilon0 = parse_real(key, v);
    } else if (key == "features") {
      next.features.clear();
      for (const auto& name : split_list(v)) {
        const auto f = reid::descriptor::parse_feature_kind(name);
        if (!f) fail(ErrorCode::kInvalidArgument, "unknown feature '" + name + "'");
        next.features.push_back(*f);
      }
    } else if (key == "covariance") {
      const auto m = reid::descriptor::parse_covariance_mode(v);
      if (!m) fail(ErrorCode::kInvalidArgument, "unknown covariance mode '" + v + "'");
      next.covariance = *m;
    } else if (key == "histogram_bins") {
      next.histogram_bins = parse_int(key, v);
    } else if (key == "siltp_tau") {
      next.siltp_tau = parse_real(key, v);
    } else if (key == "palette") {
      next.palette = v.empty() ? reid::sgm::default_palette() : reid::sgm::load_palette(v);
      config->palette_path = v;
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown configuration key '" + key + "'");
    }
    next.validate();
    config->value = std::move(next);
  });
}

reid_status reid_config_describe(const reid_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = dup_string(reid::pipeline::config_to_json(config->value).dump(2));
  });
}

reid_status reid_manifest_load(const char* path, reid_manifest** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<reid_manifest>();
    m->value = reid::evalkit::load_manifest(path);
    *out = m.release();
  });
}

void reid_manifest_destroy(reid_manifest* manifest) { delete manifest; }

size_t reid_manifest_count(const reid_manifest* m) { return m ? m->value.entries.size() : 0; }

size_t reid_manifest_identity_count(const reid_manifest* m) {
  return m ? m->value.person_ids().size() : 0;
}

reid_status reid_synth(const char* spec_text, const uint64_t* seed, int clean, const char* out_dir,
                       reid_manifest** out) {
  return guarded([&] {
    require(out_dir, "out_dir");
    auto spec = spec_text ? reid::evalkit::parse_synth_spec(spec_text) : reid::evalkit::SynthSpec{};
    if (seed) spec.seed = *seed;
    if (clean) spec = spec.clean();
    auto manifest = reid::evalkit::synth_dataset(spec, out_dir);
    if (out) {
      auto m = std::make_unique<reid_manifest>();
      m->value = std::move(manifest);
      *out = m.release();
    }
  });
}

reid_status reid_extract_image(const reid_config* config, const char* image_path,
                               const char* mask_path, float* values, size_t capacity,
                               size_t* dim) {
  return guarded([&] {
    require(config, "config");
    require(image_path, "image_path");
    if (config->value.covariance == reid::descriptor::CovarianceMode::kGlobal)
      fail(ErrorCode::kInvalidArgument, "global covariance needs a corpus, use reid_extract");
    const auto image = reid::imaging::load_image(image_path);
    std::optional<reid::imaging::ForegroundMask> mask;
    if (mask_path && config->value.use_mask) mask = reid::imaging::load_mask(mask_path, image);
    const auto rep =
        reid::descriptor::extract(image, mask ? &*mask : nullptr, config->value, image_path);
    if (dim) *dim = rep.values.size();
    if (values)
      for (size_t i = 0; i < std::min(capacity, rep.values.size()); ++i)
        values[i] = static_cast<float>(rep.values[i]);
  });
}

reid_status reid_extract(const reid_manifest* manifest, const reid_config* config, int threads,
                         reid_descriptors** out, reid_timing* timing) {
  return guarded([&] {
    require(manifest, "manifest");
    require(config, "config");
    require(out, "out");
    reid::pipeline::ExtractionTiming t;
    auto d = std::make_unique<reid_descriptors>();
    d->value = reid::pipeline::extract_manifest(manifest->value, config->value, threads, &t);
    if (timing) *timing = {t.images, t.mean_seconds, t.p95_seconds};
    *out = d.release();
  });
}

reid_status reid_descriptors_load(const char* path, reid_descriptors** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto d = std::make_unique<reid_descriptors>();
    d->value = reid::descriptor::load_descriptor_set(path);
    *out = d.release();
  });
}

reid_status reid_descriptors_save(const reid_descriptors* set, const char* path) {
  return guarded([&] {
    require(set, "set");
    require(path, "path");
    reid::descriptor::save_descriptor_set(set->value, path);
  });
}

void reid_descriptors_destroy(reid_descriptors* set) { delete set; }

size_t reid_descriptors_count(const reid_descriptors* set) { return set ? set->value.count() : 0; }

size_t reid_descriptors_dim(const reid_descriptors* set) { return set ? set->value.dim : 0; }

reid_status reid_descriptors_row(const reid_descriptors* set, size_t index, const float** values,
                                 const char** source_id) {
  return guarded([&] {
    require(set, "set");
    if (index >= set->value.count())
      fail(ErrorCode::kInvalidArgument, "row " + std::to_string(index) + " out of range");
    if (values) *values = set->value.row(index);
    if (source_id) *source_id = set->value.source_ids[index].c_str();
  });
}

reid_status reid_descriptors_describe(const reid_descriptors* set, char** out) {
  return guarded([&] {
    require(set, "set");
    require(out, "out");
    *out = dup_string(describe_set(set->value).dump(2));
  });
}

reid_status reid_descriptors_csv(const reid_descriptors* set, char** out) {
  return guarded([&] {
    require(set, "set");
    require(out, "out");
    *out = dup_string(reid::descriptor::descriptor_set_csv(set->value));
  });
}

reid_status reid_train(const reid_descriptors* set, const reid_manifest* manifest,
                       const reid_train_options* options, reid_model** out, char** warnings) {
  return guarded([&] {
    require(set, "set");
    require(manifest, "manifest");
    require(options, "options");
    require(out, "out");
    const auto split = pick_split(manifest->value, options->split);
    reid::pipeline::TrainConfig cfg{options->r, options->ridge, options->per_feature != 0};
    auto result = reid::pipeline::train(set->value, manifest->value, split, options->split.fraction, cfg);
    std::string notes;
    for (const auto& w : result.warnings) notes += w + "\n";
    auto m = std::make_unique<reid_model>();
    m->value = std::move(result.bundle);
    if (warnings) *warnings = dup_string(notes);
    *out = m.release();
  });
}

reid_status reid_model_load(const char* path, reid_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<reid_model>();
    m->value = reid::pipeline::load_model(path);
    *out = m.release();
  });
}

reid_status reid_model_save(const reid_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    reid::pipeline::save_model(model->value, path);
  });
}

void reid_model_destroy(reid_model* model) { delete model; }

reid_status reid_model_describe(const reid_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup_string(describe_model(model->value).dump(2));
  });
}

reid_status reid_score_pair(const reid_model* model, const reid_descriptors* set, size_t probe,
                            size_t gallery, reid_camera probe_camera, double* score) {
  return guarded([&] {
    require(model, "model");
    require(set, "set");
    require(score, "score");
    reid::pipeline::check_compatible(set->value, model->value);
    if (probe >= set->value.count() || gallery >= set->value.count())
      fail(ErrorCode::kInvalidArgument, "row index out of range");
    const auto pv = camera_of(probe_camera) == reid::evalkit::Camera::kA ? reid::ccl::CameraView::kA
                                                                         : reid::ccl::CameraView::kB;
    const auto gv = pv == reid::ccl::CameraView::kA ? reid::ccl::CameraView::kB : reid::ccl::CameraView::kA;
    *score = model->value.score(model->value.project(set->value.row(probe), pv),
                                model->value.project(set->value.row(gallery), gv));
  });
}

reid_status reid_score_split(const reid_model* model, const reid_descriptors* set,
                             const reid_manifest* manifest, reid_camera probe_camera, int threads,
                             char** out) {
  return guarded([&] {
    require(model, "model");
    require(set, "set");
    require(manifest, "manifest");
    require(out, "out");
    const auto& b = model->value;
    const reid_split s{b.split_seed, b.split_fraction, static_cast<int>(b.split_index)};
    reid::pipeline::EvalOptions opts;
    opts.probe_camera = camera_of(probe_camera);
    opts.threads = threads;
    std::vector<std::string> probe_ids, gallery_ids;
    const auto scores = reid::pipeline::score_test_split(set->value, manifest->value, b,
                                                         pick_split(manifest->value, s), opts,
                                                         probe_ids, gallery_ids);
    std::ostringstream csv;
    csv.precision(17);
    csv << "probe";
    for (const auto& g : gallery_ids) csv << ',' << g;
    csv << '\n';
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      csv << probe_ids[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < scores.cols(); ++j) csv << ',' << scores(i, j);
      csv << '\n';
    }
    *out = dup_string(csv.str());
  });
}

reid_status reid_evaluate(const reid_descriptors* set, const reid_manifest* manifest,
                          const reid_model* model, const reid_eval_options* options,
                          reid_report** out) {
  return guarded([&] {
    require(set, "set");
    require(manifest, "manifest");
    require(options, "options");
    require(out, "out");
    reid::pipeline::EvalOptions opts;
    if (options->protocol != REID_SINGLE_SHOT && options->protocol != REID_MULTI_SHOT)
      fail(ErrorCode::kInvalidArgument, "unknown protocol");
    opts.protocol = options->protocol == REID_SINGLE_SHOT ? reid::pipeline::Protocol::kSingleShot
                                                          : reid::pipeline::Protocol::kMultiShot;
    opts.probe_camera = camera_of(options->probe_camera);
    opts.threads = options->threads;

    auto report = std::make_unique<reid_report>();
    if (model != nullptr) {
      if (options->method != REID_METHOD_CCL)
        fail(ErrorCode::kInvalidArgument, "a model can only be evaluated with the subspace method");
      const auto& b = model->value;
      const reid_split s{b.split_seed, b.split_fraction, static_cast<int>(b.split_index)};
      report->curves.push_back(
          reid::pipeline::evaluate(set->value, manifest->value, b, pick_split(manifest->value, s), opts));
    } else {
      if (options->n_splits < 1) fail(ErrorCode::kInvalidArgument, "n_splits must be positive");
      const auto splits = reid::evalkit::make_splits(manifest->value, options->split.fraction,
                                                     options->n_splits, options->split.seed);
      if (options->method == REID_METHOD_EUCLIDEAN) {
        for (const auto& s : splits)
          report->curves.push_back(reid::pipeline::evaluate_euclidean(set->value, manifest->value, s, opts));
      } else if (options->method == REID_METHOD_CCL) {
        reid::pipeline::TrainConfig cfg{options->r, options->ridge, options->per_feature != 0};
        report->curves = reid::pipeline::run_splits(set->value, manifest->value, splits,
                                                    options->split.fraction, cfg, opts);
      } else {
        fail(ErrorCode::kInvalidArgument, "unknown method");
      }
    }
    report->table = reid::evalkit::report(report->curves, {1, 5, 10, 20});
    *out = report.release();
  });
}

void reid_report_destroy(reid_report* report) { delete report; }

reid_status reid_report_rate(const reid_report* report, int rank, double* rate) {
  return guarded([&] {
    require(report, "report");
    require(rate, "rate");
    if (rank < 1) fail(ErrorCode::kInvalidArgument, "rank must be at least 1");
    *rate = reid::evalkit::report(report->curves, {rank}).mean_rates.front();
  });
}

int reid_report_splits(const reid_report* report) { return report ? report->table.curves : 0; }

reid_status reid_report_csv(const reid_report* report, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = dup_string(report->table.to_csv());
  });
}

reid_status reid_report_text(const reid_report* report, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = dup_string(report->table.to_text());
  });
}

reid_status reid_inspect(const char* path_c, char** out) {
  return guarded([&] {
    require(path_c, "path");
    require(out, "out");
    const std::string path = path_c;
    std::string head(8, '\0');
    {
      std::ifstream in(path, std::ios::binary);
      if (!in) fail(ErrorCode::kIoFailure, "cannot open " + path);
      in.read(head.data(), static_cast<std::streamsize>(head.size()));
      head.resize(static_cast<std::size_t>(in.gcount()));
    }
    json j;
    if (head.rfind("SGMD", 0) == 0) {
      j = describe_set(reid::descriptor::load_descriptor_set(path));
    } else if (head.rfind("CCLM", 0) == 0) {
      j = describe_model(reid::pipeline::load_model(path));
    } else if (head.rfind("P5", 0) == 0) {
      const auto mask = reid::imaging::decode_pgm_mask(reid::io::read_binary_file(path));
      j = {{"type", "mask"}, {"width", mask.width}, {"height", mask.height},
           {"foreground_pixels", std::count(mask.values.begin(), mask.values.end(), 1)}};
    } else if (head.rfind("P6", 0) == 0 || head.rfind("\x89PNG", 0) == 0) {
      const auto image = reid::imaging::load_image(path);
      j = {{"type", "image"}, {"width", image.width}, {"height", image.height}};
    } else {
      const auto m = reid::evalkit::load_manifest(path);
      m.validate();
      j = {{"type", "manifest"}, {"entries", m.entries.size()}, {"identities", m.person_ids().size()}};
    }
    *out = dup_string(j.dump(2));
  });
}

}  // extern "C"

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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "reid/reid.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json take_json(char* s) {
  REQUIRE(s != nullptr);
  json j = json::parse(s);
  reid_string_free(s);
  return j;
}

std::string take_string(char* s) {
  REQUIRE(s != nullptr);
  std::string out = s;
  reid_string_free(s);
  return out;
}

struct Fixture {
  fs::path dir;
  reid_manifest* manifest = nullptr;
  reid_config* config = nullptr;
  reid_descriptors* set = nullptr;

  Fixture() {
    dir = fs::temp_directory_path() / "sgmreid_test_capi";
    fs::remove_all(dir);
    const uint64_t seed = 11;
    REQUIRE(reid_synth("n_ids = 8\n", &seed, 0, dir.string().c_str(), &manifest) == REID_OK);
    REQUIRE(reid_config_create(&config) == REID_OK);
    REQUIRE(reid_config_set(config, "stripes", "2") == REID_OK);
    REQUIRE(reid_extract(manifest, config, 2, &set, nullptr) == REID_OK);
  }
  ~Fixture() {
    reid_descriptors_destroy(set);
    reid_config_destroy(config);
    reid_manifest_destroy(manifest);
    fs::remove_all(dir);
  }
};

}  // namespace

TEST_CASE("status names, version and option defaults") {
  CHECK(std::strlen(reid_version()) > 0);
  CHECK(std::string(reid_status_name(REID_OK)) == "Ok");
  CHECK(std::string(reid_status_name(REID_E_CORRUPT_FILE)) == "CorruptFile");
  CHECK(std::string(reid_status_name(REID_E_ARTIFACT_MISMATCH)) == "ArtifactMismatch");
  CHECK(std::string(reid_status_name(REID_E_INTERNAL)) == "Internal");
  CHECK(std::string(reid_status_name(static_cast<reid_status>(99))) == "Unknown");
  reid_train_options t;
  reid_train_options_init(&t);
  CHECK(t.r == 100);
  CHECK(t.split.fraction == 0.5);
  reid_eval_options e;
  reid_eval_options_init(&e);
  CHECK(e.n_splits == 10);
  CHECK(e.probe_camera == REID_CAMERA_A);
  reid_string_free(nullptr);
}

TEST_CASE("errors are reported through status codes and the last error") {
  reid_config* config = nullptr;
  REQUIRE(reid_config_create(&config) == REID_OK);
  CHECK(reid_config_set(config, "colour", "1") == REID_E_INVALID_ARGUMENT);
  CHECK(std::string(reid_last_error()).find("colour") != std::string::npos);
  CHECK(reid_config_set(config, "k", "17") == REID_E_INVALID_ARGUMENT);
  CHECK(reid_config_set(config, "k", "three") == REID_E_INVALID_ARGUMENT);
  CHECK(reid_config_set(config, "spaces", "RGB,XYZ") == REID_E_INVALID_ARGUMENT);
  CHECK(reid_config_set(config, "k", "3") == REID_OK);
  CHECK(reid_config_set(config, "spaces", "RGB,HSV") == REID_OK);
  CHECK(reid_config_set(config, "features", "sgm,siltp") == REID_OK);
  CHECK(reid_config_set(config, "use_mask", "false") == REID_OK);
  char* text = nullptr;
  REQUIRE(reid_config_describe(config, &text) == REID_OK);
  const json j = take_json(text);
  CHECK(j.at("k") == 3);
  CHECK(j.at("use_mask") == false);
  reid_config_destroy(config);

  reid_descriptors* set = nullptr;
  CHECK(reid_descriptors_load("/nonexistent/x.sgmd", &set) == REID_E_IO_FAILURE);
  CHECK(set == nullptr);
  CHECK(std::strlen(reid_last_error()) > 0);
  CHECK(reid_config_create(nullptr) == REID_E_INVALID_ARGUMENT);
  CHECK(reid_inspect(nullptr, &text) == REID_E_INVALID_ARGUMENT);
  reid_manifest* m = nullptr;
  CHECK(reid_manifest_load("/nonexistent/manifest.csv", &m) == REID_E_IO_FAILURE);
  reid_model* model = nullptr;
  CHECK(reid_model_load("/nonexistent/m.cclm", &model) == REID_E_IO_FAILURE);
  reid_descriptors_destroy(nullptr);
  reid_model_destroy(nullptr);
}

TEST_CASE("synthesize, extract, train, score and evaluate through the C interface") {
  Fixture f;
  CHECK(reid_manifest_count(f.manifest) == 16);
  CHECK(reid_manifest_identity_count(f.manifest) == 8);
  CHECK(reid_descriptors_count(f.set) == 16);
  CHECK(reid_descriptors_dim(f.set) == 256);

  const float* row = nullptr;
  const char* source = nullptr;
  REQUIRE(reid_descriptors_row(f.set, 0, &row, &source) == REID_OK);
  CHECK(std::string(source) == "cam_a/p0000_0.ppm");
  double sum = 0.0;
  for (int i = 0; i < 16; ++i) sum += row[i];
  CHECK(std::abs(sum - 1.0) < 1e-5);
  CHECK(reid_descriptors_row(f.set, 16, &row, &source) == REID_E_INVALID_ARGUMENT);

  std::vector<float> single(256);
  size_t dim = 0;
  const std::string image = (f.dir / "cam_a/p0000_0.ppm").string();
  const std::string mask = (f.dir / "cam_a/p0000_0_mask.pgm").string();
  REQUIRE(reid_extract_image(f.config, image.c_str(), mask.c_str(), single.data(), single.size(), &dim) == REID_OK);
  CHECK(dim == 256);
  CHECK(std::memcmp(single.data(), row, 256 * sizeof(float)) == 0);
  REQUIRE(reid_extract_image(f.config, image.c_str(), nullptr, nullptr, 0, &dim) == REID_OK);
  CHECK(dim == 128);

  const std::string set_path = (f.dir / "set.sgmd").string();
  REQUIRE(reid_descriptors_save(f.set, set_path.c_str()) == REID_OK);
  reid_descriptors* loaded = nullptr;
  REQUIRE(reid_descriptors_load(set_path.c_str(), &loaded) == REID_OK);
  const float* loaded_row = nullptr;
  REQUIRE(reid_descriptors_row(loaded, 15, &loaded_row, nullptr) == REID_OK);
  REQUIRE(reid_descriptors_row(f.set, 15, &row, nullptr) == REID_OK);
  CHECK(std::memcmp(loaded_row, row, 256 * sizeof(float)) == 0);
  reid_descriptors_destroy(loaded);

  reid_train_options topts;
  reid_train_options_init(&topts);
  topts.r = 3000;
  topts.split.seed = 4;
  reid_model* model = nullptr;
  char* warnings = nullptr;
  REQUIRE(reid_train(f.set, f.manifest, &topts, &model, &warnings) == REID_OK);
  CHECK(take_string(warnings).find("clamped to 256") != std::string::npos);
  reid_model_destroy(model);
  topts.r = 6;
  REQUIRE(reid_train(f.set, f.manifest, &topts, &model, nullptr) == REID_OK);

  char* text = nullptr;
  REQUIRE(reid_model_describe(model, &text) == REID_OK);
  const json mj = take_json(text);
  CHECK(mj.at("type") == "model");
  CHECK(mj.at("descriptor_dim") == 256);
  CHECK(mj.at("pair_count") == 4);
  CHECK(mj.at("split").at("seed") == 4);
  CHECK(mj.at("parts").at(0).at("rank") == 6);

  double ab = 0.0, ba = 0.0;
  REQUIRE(reid_score_pair(model, f.set, 0, 1, REID_CAMERA_A, &ab) == REID_OK);
  CHECK(std::isfinite(ab));
  REQUIRE(reid_score_pair(model, f.set, 0, 1, REID_CAMERA_B, &ba) == REID_OK);
  CHECK(std::isfinite(ba));
  CHECK(reid_score_pair(model, f.set, 0, 99, REID_CAMERA_A, &ab) == REID_E_INVALID_ARGUMENT);

  REQUIRE(reid_score_split(model, f.set, f.manifest, REID_CAMERA_A, 1, &text) == REID_OK);
  const std::string csv = take_string(text);
  CHECK(csv.rfind("probe,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  reid_eval_options eopts;
  reid_eval_options_init(&eopts);
  reid_report* report = nullptr;
  REQUIRE(reid_evaluate(f.set, f.manifest, model, &eopts, &report) == REID_OK);
  CHECK(reid_report_splits(report) == 1);
  double r1 = -1.0, r4 = -1.0;
  REQUIRE(reid_report_rate(report, 1, &r1) == REID_OK);
  REQUIRE(reid_report_rate(report, 4, &r4) == REID_OK);
  CHECK(r1 >= 0.0);
  CHECK(r1 <= r4);
  CHECK(r4 == 1.0);
  REQUIRE(reid_report_csv(report, &text) == REID_OK);
  CHECK(take_string(text).rfind("1,5,10,20\n", 0) == 0);
  REQUIRE(reid_report_text(report, &text) == REID_OK);
  CHECK(take_string(text).find("Rank") != std::string::npos);
  reid_report_destroy(report);

  eopts.method = REID_METHOD_EUCLIDEAN;
  eopts.n_splits = 3;
  REQUIRE(reid_evaluate(f.set, f.manifest, nullptr, &eopts, &report) == REID_OK);
  CHECK(reid_report_splits(report) == 3);
  reid_report_destroy(report);

  const std::string model_path = (f.dir / "model.cclm").string();
  REQUIRE(reid_model_save(model, model_path.c_str()) == REID_OK);
  reid_model* reloaded = nullptr;
  REQUIRE(reid_model_load(model_path.c_str(), &reloaded) == REID_OK);
  double again = 0.0;
  REQUIRE(reid_score_pair(model, f.set, 2, 3, REID_CAMERA_A, &ab) == REID_OK);
  REQUIRE(reid_score_pair(reloaded, f.set, 2, 3, REID_CAMERA_A, &again) == REID_OK);
  CHECK(ab == again);

  reid_config* narrow_cfg = nullptr;
  reid_config_create(&narrow_cfg);
  reid_config_set(narrow_cfg, "use_mask", "0");
  reid_config_set(narrow_cfg, "stripes", "2");
  reid_descriptors* narrow = nullptr;
  REQUIRE(reid_extract(f.manifest, narrow_cfg, 1, &narrow, nullptr) == REID_OK);
  eopts.method = REID_METHOD_CCL;
  CHECK(reid_evaluate(narrow, f.manifest, model, &eopts, &report) == REID_E_ARTIFACT_MISMATCH);
  CHECK(std::string(reid_last_error()).find("128") != std::string::npos);
  reid_descriptors_destroy(narrow);
  reid_config_destroy(narrow_cfg);

  REQUIRE(reid_inspect(set_path.c_str(), &text) == REID_OK);
  CHECK(take_json(text).at("dim") == 256);
  REQUIRE(reid_inspect(model_path.c_str(), &text) == REID_OK);
  CHECK(take_json(text).at("type") == "model");
  REQUIRE(reid_inspect(image.c_str(), &text) == REID_OK);
  CHECK(take_json(text).at("width") == 48);
  REQUIRE(reid_inspect(mask.c_str(), &text) == REID_OK);
  CHECK(take_json(text).at("type") == "mask");
  REQUIRE(reid_inspect((f.dir / "manifest.csv").string().c_str(), &text) == REID_OK);
  CHECK(take_json(text).at("identities") == 8);

  reid_model_destroy(reloaded);
  reid_model_destroy(model);
}

TEST_CASE("extraction failures through the C interface") {
  const fs::path dir = fs::temp_directory_path() / "sgmreid_test_capi_fail";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::FILE* out = std::fopen((dir / "manifest.csv").string().c_str(), "w");
    std::fputs("person_id,camera,image_path,mask_path\np1,A,nowhere_a.ppm,\np1,B,nowhere_b.ppm,\n", out);
    std::fclose(out);
  }
  reid_manifest* m = nullptr;
  REQUIRE(reid_manifest_load((dir / "manifest.csv").string().c_str(), &m) == REID_OK);
  reid_config* c = nullptr;
  reid_config_create(&c);
  reid_descriptors* set = nullptr;
  CHECK(reid_extract(m, c, 1, &set, nullptr) == REID_E_IO_FAILURE);
  CHECK(set == nullptr);
  CHECK(std::string(reid_last_error()).find("nowhere_b.ppm") != std::string::npos);
  reid_config_destroy(c);
  reid_manifest_destroy(m);
  fs::remove_all(dir);
}

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

// sgmreid command-line front end. Links only the public C interface.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "reid/reid.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  reid_status status;
  std::string message;
};

int exit_code(reid_status s) {
  switch (s) {
    case REID_OK: return kExitOk;
    case REID_E_INVALID_ARGUMENT: return kExitUsage;
    case REID_E_NOT_POSITIVE_DEFINITE:
    case REID_E_NUMERIC_FAILURE:
    case REID_E_OUT_OF_MEMORY:
    case REID_E_INTERNAL: return kExitNumeric;
    default: return kExitData;
  }
}

void check(reid_status s) {
  if (s != REID_OK) throw Failure{s, reid_last_error()};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Config = std::unique_ptr<reid_config, Deleter<reid_config, reid_config_destroy>>;
using Manifest = std::unique_ptr<reid_manifest, Deleter<reid_manifest, reid_manifest_destroy>>;
using Descriptors =
    std::unique_ptr<reid_descriptors, Deleter<reid_descriptors, reid_descriptors_destroy>>;
using Model = std::unique_ptr<reid_model, Deleter<reid_model, reid_model_destroy>>;
using Report = std::unique_ptr<reid_report, Deleter<reid_report, reid_report_destroy>>;

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  std::string out = s ? s : "";
  reid_string_free(s);
  return out;
}

Manifest load_manifest(const std::string& path) {
  reid_manifest* m = nullptr;
  check(reid_manifest_load(path.c_str(), &m));
  return Manifest(m);
}

Descriptors load_descriptors(const std::string& path) {
  reid_descriptors* d = nullptr;
  check(reid_descriptors_load(path.c_str(), &d));
  return Descriptors(d);
}

Model load_model(const std::string& path) {
  reid_model* m = nullptr;
  check(reid_model_load(path.c_str(), &m));
  return Model(m);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{REID_E_IO_FAILURE, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{REID_E_IO_FAILURE, "cannot write " + path};
}

std::string normalize_key(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

// Flat "key = value" file; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Failure{REID_E_INVALID_ARGUMENT,
                    path + ":" + std::to_string(number) + ": expected key = value"};
    out[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return out;
}

bool has_option(CLI::App* app, const std::string& key) {
  return app->get_option_no_throw("--" + key) != nullptr;
}

// Fills options not given on the command line (or environment) from the file.
void apply_config(CLI::App& app, CLI::App* sub, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    if (key == "config") continue;
    bool known = has_option(&app, key);
    for (auto* s : app.get_subcommands({})) known = known || has_option(s, key);
    if (!known) throw Failure{REID_E_INVALID_ARGUMENT, "unknown configuration key '" + key + "'"};
    for (CLI::App* scope : {&app, sub}) {
      if (scope == nullptr) continue;
      CLI::Option* opt = scope->get_option_no_throw("--" + key);
      if (opt == nullptr || opt->count() > 0) continue;
      if (opt->get_type_size() == 0) {
        if (value != "true" && value != "1" && value != "false" && value != "0")
          throw Failure{REID_E_INVALID_ARGUMENT, key + " expects true or false"};
        if (value == "true" || value == "1") opt->add_result("true");
      } else {
        opt->add_result(value);
      }
      opt->run_callback();
    }
  }
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool verbose = false;
};

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

reid_camera parse_camera(const std::string& s) {
  if (s == "A" || s == "a") return REID_CAMERA_A;
  if (s == "B" || s == "b") return REID_CAMERA_B;
  throw Failure{REID_E_INVALID_ARGUMENT, "camera must be A or B"};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string out_dir;
  bool clean = false;
  bool force = false;
};

int run_synth(const Globals& g, const SynthArgs& a) {
  std::error_code ec;
  if (fs::exists(a.out_dir, ec) && !fs::is_empty(a.out_dir, ec) && !a.force) {
    std::cerr << "error: output directory " << a.out_dir << " is not empty (use --force)\n";
    return kExitUsage;
  }
  const std::string spec_text = a.spec.empty() ? std::string() : read_text(a.spec);
  const std::uint64_t seed = g.seed.value_or(0);
  reid_manifest* m = nullptr;
  check(reid_synth(a.spec.empty() ? nullptr : spec_text.c_str(), g.seed ? &seed : nullptr,
                   a.clean ? 1 : 0, a.out_dir.c_str(), &m));
  Manifest manifest(m);
  std::cout << "wrote " << reid_manifest_count(m) << " images of "
            << reid_manifest_identity_count(m) << " identities to "
            << (fs::path(a.out_dir) / "manifest.csv").string() << "\n";
  return kExitOk;
}

struct ExtractArgs {
  std::string manifest;
  std::string out;
  std::map<std::string, std::string> settings;
};

int run_extract(const Globals& g, const ExtractArgs& a) {
  reid_config* c = nullptr;
  check(reid_config_create(&c));
  Config config(c);
  for (const auto& [key, value] : a.settings) check(reid_config_set(c, key.c_str(), value.c_str()));
  if (g.verbose) std::cerr << take([&] {
      char* s = nullptr;
      check(reid_config_describe(c, &s));
      return s;
    }()) << "\n";

  auto manifest = load_manifest(a.manifest);
  reid_descriptors* d = nullptr;
  reid_timing timing{};
  const reid_status st = reid_extract(manifest.get(), c, g.threads, &d, &timing);
  if (st != REID_OK) {
    std::error_code ec;
    fs::remove(a.out + ".tmp", ec);
    throw Failure{st, reid_last_error()};
  }
  Descriptors set(d);
  check(reid_descriptors_save(d, a.out.c_str()));
  std::printf("extracted %zu images, dim %zu\n", reid_descriptors_count(d), reid_descriptors_dim(d));
  std::printf("per-image time: mean %.4f s, p95 %.4f s\n", timing.mean_seconds, timing.p95_seconds);
  return kExitOk;
}

struct TrainArgs {
  std::string descriptors;
  std::string manifest;
  std::string out;
  int r = 100;
  double ridge = 1e-3;
  bool per_feature = true;
  double fraction = 0.5;
  int split_index = 0;
};

int run_train(const Globals& g, const TrainArgs& a) {
  auto set = load_descriptors(a.descriptors);
  auto manifest = load_manifest(a.manifest);
  reid_train_options o;
  reid_train_options_init(&o);
  o.r = a.r;
  o.ridge = a.ridge;
  o.per_feature = a.per_feature ? 1 : 0;
  o.split = {g.seed.value_or(0), a.fraction, a.split_index};
  reid_model* m = nullptr;
  char* warnings = nullptr;
  check(reid_train(set.get(), manifest.get(), &o, &m, &warnings));
  Model model(m);
  const std::string notes = take(warnings);
  if (!notes.empty()) std::cerr << "warning: " << notes;
  check(reid_model_save(m, a.out.c_str()));
  char* summary = nullptr;
  check(reid_model_describe(m, &summary));
  std::cout << take(summary) << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string descriptors;
  std::string manifest;
  std::string model;
  std::string output;
  std::string protocol = "single";
  std::string probe_camera = "A";
  std::string method = "ccl";
  std::string format = "csv";
  int splits = 10;
  double fraction = 0.5;
  int r = 100;
  double ridge = 1e-3;
  bool per_feature = true;
};

int run_eval(const Globals& g, const EvalArgs& a) {
  auto set = load_descriptors(a.descriptors);
  auto manifest = load_manifest(a.manifest);
  Model model;
  if (!a.model.empty()) model = load_model(a.model);
  reid_eval_options o;
  reid_eval_options_init(&o);
  o.protocol = a.protocol == "multi" ? REID_MULTI_SHOT : REID_SINGLE_SHOT;
  o.probe_camera = parse_camera(a.probe_camera);
  o.method = a.method == "euclidean" ? REID_METHOD_EUCLIDEAN : REID_METHOD_CCL;
  o.n_splits = a.splits;
  o.threads = g.threads;
  o.split = {g.seed.value_or(0), a.fraction, 0};
  o.r = a.r;
  o.ridge = a.ridge;
  o.per_feature = a.per_feature ? 1 : 0;
  reid_report* r = nullptr;
  check(reid_evaluate(set.get(), manifest.get(), model.get(), &o, &r));
  Report report(r);
  char* text = nullptr;
  check(a.format == "text" ? reid_report_text(r, &text) : reid_report_csv(r, &text));
  write_text(a.output, take(text));
  if (g.verbose) std::cerr << "averaged over " << reid_report_splits(r) << " split(s)\n";
  return kExitOk;
}

struct ScoreArgs {
  std::string descriptors;
  std::string manifest;
  std::string model;
  std::string output;
  std::string probe_camera = "A";
};

int run_score(const Globals& g, const ScoreArgs& a) {
  auto set = load_descriptors(a.descriptors);
  auto manifest = load_manifest(a.manifest);
  auto model = load_model(a.model);
  char* csv = nullptr;
  check(reid_score_split(model.get(), set.get(), manifest.get(), parse_camera(a.probe_camera),
                         g.threads, &csv));
  write_text(a.output, take(csv));
  return kExitOk;
}

struct InspectArgs {
  std::vector<std::string> paths;
  bool csv = false;
};

int run_inspect(const Globals&, const InspectArgs& a) {
  for (const auto& p : a.paths) {
    if (a.csv) {
      auto set = load_descriptors(p);
      char* csv = nullptr;
      check(reid_descriptors_csv(set.get(), &csv));
      std::cout << take(csv);
      continue;
    }
    char* json = nullptr;
    check(reid_inspect(p.c_str(), &json));
    std::cout << take(json) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Person re-identification with soft Gaussian color-name maps and coupled subspace learning",
               "sgmreid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("sgmreid ") + reid_version());

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Flat key = value file; command-line flags take precedence");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for synthesis and identity splits");
  app.add_option("--threads", g.threads, "Worker thread bound")
      ->envname("REID_SGM_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", g.verbose, "Print extra diagnostics");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-camera corpus");
  synth->add_option("--spec", sa.spec, "Spec file of key = value lines")->check(CLI::ExistingFile);
  synth->add_option("--out-dir", sa.out_dir, "Output directory");
  synth->add_flag("--clean", sa.clean, "No noise, no camera transform");
  synth->add_flag("--force", sa.force, "Write into a non-empty directory");

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "Compute descriptors for every manifest image");
  extract->add_option("--manifest", ea.manifest, "Manifest CSV");
  extract->add_option("--out", ea.out, "Descriptor file to write");
  for (const char* key : {"k", "stripes", "spaces", "use-mask", "epsilon0", "features", "covariance",
                          "palette", "histogram-bins", "siltp-tau"}) {
    std::string name = key;
    extract->add_option_function<std::string>(
        "--" + name,
        [&ea, name](const std::string& v) {
          std::string k = name;
          for (char& ch : k)
            if (ch == '-') ch = '_';
          ea.settings[k] = v;
        },
        "Extraction setting " + name);
  }

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Learn coupled subspace models on a training split");
  train->add_option("--descriptors", ta.descriptors, "Descriptor file");
  train->add_option("--manifest", ta.manifest, "Manifest CSV");
  train->add_option("--out", ta.out, "Model file to write");
  train->add_option("--r", ta.r, "Subspace dimension")->capture_default_str();
  train->add_option("--ridge", ta.ridge, "Relative ridge added to both covariances")->capture_default_str();
  train->add_option("--per-feature", ta.per_feature, "One model per feature kind")->capture_default_str();
  train->add_option("--fraction", ta.fraction, "Share of identities used for training")->capture_default_str();
  train->add_option("--split-index", ta.split_index, "Which seeded split to train on")->capture_default_str();

  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "Report CMC rates at ranks 1, 5, 10, 20");
  eval->add_option("--descriptors", va.descriptors, "Descriptor file");
  eval->add_option("--manifest", va.manifest, "Manifest CSV");
  eval->add_option("--model", va.model, "Model file; evaluates its own split");
  eval->add_option("--output", va.output, "Report destination, stdout by default");
  eval->add_option("--protocol", va.protocol, "single or multi")
      ->check(CLI::IsMember({"single", "multi"}))->capture_default_str();
  eval->add_option("--probe-camera", va.probe_camera, "A or B")->capture_default_str();
  eval->add_option("--method", va.method, "ccl or euclidean")
      ->check(CLI::IsMember({"ccl", "euclidean"}))->capture_default_str();
  eval->add_option("--format", va.format, "csv or text")
      ->check(CLI::IsMember({"csv", "text"}))->capture_default_str();
  eval->add_option("--splits", va.splits, "Number of random splits without --model")->capture_default_str();
  eval->add_option("--fraction", va.fraction, "Share of identities used for training")->capture_default_str();
  eval->add_option("--r", va.r, "Subspace dimension when retraining")->capture_default_str();
  eval->add_option("--ridge", va.ridge, "Relative ridge when retraining")->capture_default_str();
  eval->add_option("--per-feature", va.per_feature, "One model per feature kind")->capture_default_str();

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Write the probe by gallery score matrix of the model's test split");
  score->add_option("--descriptors", sc.descriptors, "Descriptor file");
  score->add_option("--manifest", sc.manifest, "Manifest CSV");
  score->add_option("--model", sc.model, "Model file");
  score->add_option("--output", sc.output, "CSV destination, stdout by default");
  score->add_option("--probe-camera", sc.probe_camera, "A or B")->capture_default_str();

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "Summarize artifacts, manifests and images");
  inspect->add_option("paths", ia.paths, "Files to inspect")->required();
  inspect->add_flag("--csv", ia.csv, "Dump descriptor rows as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!g.config.empty()) apply_config(app, sub, read_config(g.config));
    if (seed_opt->count() > 0) g.seed = seed;
    if (g.threads <= 0) g.threads = default_threads();

    auto need = [](const std::string& value, const char* flag) {
      if (value.empty()) throw Failure{REID_E_INVALID_ARGUMENT, std::string(flag) + " is required"};
    };
    if (sub == synth) {
      need(sa.out_dir, "--out-dir");
      return run_synth(g, sa);
    }
    if (sub == extract) {
      need(ea.manifest, "--manifest");
      need(ea.out, "--out");
      return run_extract(g, ea);
    }
    if (sub == train) {
      need(ta.descriptors, "--descriptors");
      need(ta.manifest, "--manifest");
      need(ta.out, "--out");
      return run_train(g, ta);
    }
    if (sub == eval) {
      need(va.descriptors, "--descriptors");
      need(va.manifest, "--manifest");
      return run_eval(g, va);
    }
    if (sub == score) {
      need(sc.descriptors, "--descriptors");
      need(sc.manifest, "--manifest");
      need(sc.model, "--model");
      return run_score(g, sc);
    }
    return run_inspect(g, ia);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return exit_code(f.status);
  }
}

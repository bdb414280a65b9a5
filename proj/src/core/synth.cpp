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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <cstdio>
#include <iomanip>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Core>

#include "core/error.hpp"
#include "core/evalkit.hpp"
#include "core/imaging.hpp"
#include "core/palette.hpp"

namespace reid::evalkit {
namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic generator independent of <random> distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1)) % (hi - lo + 1);
  }
  double gaussian() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
  return mix64(seed ^ mix64(a ^ mix64(b ^ mix64(c))));
}

struct Region {
  int rows;  // height in body rows
  Eigen::Vector3d color;
  Eigen::Vector3d stripe_color;
  int stripe_period = 0;  // 0: plain
};

struct Identity {
  std::vector<Region> regions;
};

Eigen::Vector3d random_mixture(Rng& rng, const sgm::ColorNamePalette& palette) {
  const int a = rng.integer(0, sgm::kNumColorNames - 1);
  int b = rng.integer(0, sgm::kNumColorNames - 2);
  if (b >= a) ++b;
  const double t = rng.uniform(0.15, 0.85);
  const double shade = rng.uniform(0.65, 1.0);
  return shade * (t * palette.rgb[a] + (1.0 - t) * palette.rgb[b]);
}

Identity make_identity(const SynthSpec& spec, int index, int body_rows) {
  Rng rng(stream_seed(spec.seed, 1, static_cast<std::uint64_t>(index)));
  const auto& palette = sgm::default_palette();
  const int n = rng.integer(spec.min_regions, spec.max_regions);
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (double& w : weights) w = rng.uniform(0.5, 1.5);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

  Identity id;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    Region r;
    r.rows = i == n - 1 ? body_rows - used
                        : std::max(4, static_cast<int>(std::lround(body_rows * weights[i] / total)));
    r.rows = std::min(r.rows, body_rows - used - (n - 1 - i) * 4);
    used += r.rows;
    r.color = random_mixture(rng, palette);
    r.stripe_color = random_mixture(rng, palette);
    if (rng.uniform() < spec.stripe_probability) r.stripe_period = rng.integer(4, 8);
    id.regions.push_back(r);
  }
  return id;
}

struct ViewTransform {
  Eigen::Matrix3d gain = Eigen::Matrix3d::Identity();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

ViewTransform make_view_transform(const SynthSpec& spec) {
  Rng rng(stream_seed(spec.seed, 2));
  ViewTransform t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double u = rng.uniform(-1.0, 1.0);
      t.gain(i, j) += (i == j ? spec.view_gain : spec.view_mixing) * u;
    }
    t.offset[i] = spec.view_offset * rng.uniform(-1.0, 1.0);
  }
  return t;
}

// Half-width of the silhouette at a body row; legs leave a two-pixel gap.
bool inside_body(int bx, int by, int body_rows, int width) {
  const double cx = 0.5 * (width - 1);
  const double dx = std::abs(bx - cx);
  const double rel = static_cast<double>(by) / body_rows;
  if (rel < 0.13) return dx <= 0.16 * width;
  if (rel < 0.55) return dx <= 0.30 * width;
  return dx <= 0.26 * width && dx >= 1.0;
}

struct Rendered {
  imaging::RasterImage image;
  imaging::ForegroundMask mask;
};

Rendered render(const SynthSpec& spec, const Identity& id, const ViewTransform* view,
                std::uint64_t stream) {
  Rng rng(stream);
  const int w = spec.width;
  const int h = spec.height;
  const int top = std::max(2, h / 32);
  const int body_rows = h - 2 * top;
  const int dx = spec.jitter > 0 ? rng.integer(-spec.jitter, spec.jitter) : 0;
  const int dy = spec.jitter > 0 ? rng.integer(-spec.jitter, spec.jitter) : 0;
  const double illum = 1.0 + spec.illumination * rng.uniform(-1.0, 1.0);
  std::vector<Eigen::Vector3d> tint(id.regions.size(), Eigen::Vector3d::Zero());
  for (auto& t : tint)
    for (int ch = 0; ch < 3; ++ch) t[ch] = spec.color_variation * rng.gaussian();

  std::vector<int> region_of_row(static_cast<std::size_t>(body_rows));
  {
    int row = 0;
    for (std::size_t r = 0; r < id.regions.size(); ++r)
      for (int k = 0; k < id.regions[r].rows && row < body_rows; ++k) region_of_row[row++] = static_cast<int>(r);
  }

  struct Blob {
    int x0, y0, x1, y1;
    Eigen::Vector3d color;
  };
  std::vector<Blob> clutter(static_cast<std::size_t>(spec.clutter_blobs));
  for (auto& b : clutter) {
    const int bw = rng.integer(std::max(1, w / 4), std::max(1, w / 2));
    const int bh = rng.integer(std::max(1, h / 8), std::max(1, h / 4));
    b.x0 = rng.integer(0, w - bw);
    b.y0 = rng.integer(0, h - bh);
    b.x1 = b.x0 + bw;
    b.y1 = b.y0 + bh;
    b.color = random_mixture(rng, sgm::default_palette());
  }

  Rendered out;
  out.image.width = out.mask.width = w;
  out.image.height = out.mask.height = h;
  out.image.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  out.mask.values.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int bx = x - dx;
      const int by = y - top - dy;
      Eigen::Vector3d c;
      const bool body = by >= 0 && by < body_rows && bx >= 0 && bx < w && inside_body(bx, by, body_rows, w);
      if (body) {
        const Region& r = id.regions[static_cast<std::size_t>(region_of_row[by])];
        const bool alt = r.stripe_period > 0 && (bx % r.stripe_period) >= r.stripe_period / 2;
        c = illum * (alt ? r.stripe_color : r.color) + tint[static_cast<std::size_t>(region_of_row[by])];
        out.mask.values[static_cast<std::size_t>(y) * w + x] = 1;
      } else {
        const double g = 0.35 + 0.25 * y / h;
        c = {g + 0.02, g, g - 0.02};
        for (const auto& b : clutter)
          if (x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) c = b.color;
      }
      if (view != nullptr) c = view->gain * c + view->offset;
      std::uint8_t* p = out.image.pixels.data() + (static_cast<std::size_t>(y) * w + x) * 3;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = 255.0 * c[ch] + spec.noise * rng.gaussian();
        p[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

using Setter = std::function<void(SynthSpec&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_ids", [](SynthSpec& s, const std::string& v) { s.n_ids = std::stoi(v); }},
      {"images_per_view", [](SynthSpec& s, const std::string& v) { s.images_per_view = std::stoi(v); }},
      {"width", [](SynthSpec& s, const std::string& v) { s.width = std::stoi(v); }},
      {"height", [](SynthSpec& s, const std::string& v) { s.height = std::stoi(v); }},
      {"min_regions", [](SynthSpec& s, const std::string& v) { s.min_regions = std::stoi(v); }},
      {"max_regions", [](SynthSpec& s, const std::string& v) { s.max_regions = std::stoi(v); }},
      {"stripe_probability", [](SynthSpec& s, const std::string& v) { s.stripe_probability = std::stod(v); }},
      {"view_gain", [](SynthSpec& s, const std::string& v) { s.view_gain = std::stod(v); }},
      {"view_mixing", [](SynthSpec& s, const std::string& v) { s.view_mixing = std::stod(v); }},
      {"view_offset", [](SynthSpec& s, const std::string& v) { s.view_offset = std::stod(v); }},
      {"color_variation", [](SynthSpec& s, const std::string& v) { s.color_variation = std::stod(v); }},
      {"clutter_blobs", [](SynthSpec& s, const std::string& v) { s.clutter_blobs = std::stoi(v); }},
      {"noise", [](SynthSpec& s, const std::string& v) { s.noise = std::stod(v); }},
      {"illumination", [](SynthSpec& s, const std::string& v) { s.illumination = std::stod(v); }},
      {"jitter", [](SynthSpec& s, const std::string& v) { s.jitter = std::stoi(v); }},
      {"seed", [](SynthSpec& s, const std::string& v) { s.seed = std::stoull(v); }},
  };
  return table;
}

void validate(const SynthSpec& spec) {
  if (spec.n_ids < 2) fail(ErrorCode::kInvalidArgument, "synthetic corpus needs n_ids >= 2");
  if (spec.images_per_view < 1) fail(ErrorCode::kInvalidArgument, "images_per_view must be >= 1");
  if (spec.width < 8 || spec.height < 32)
    fail(ErrorCode::kInvalidArgument, "synthetic images must be at least 8x32");
  if (spec.min_regions < 1 || spec.max_regions < spec.min_regions ||
      spec.max_regions * 4 > spec.height - 2 * std::max(2, spec.height / 32))
    fail(ErrorCode::kInvalidArgument, "invalid clothing region counts");
  if (spec.noise < 0 || spec.jitter < 0 || spec.illumination < 0 || spec.color_variation < 0 ||
      spec.clutter_blobs < 0)
    fail(ErrorCode::kInvalidArgument, "noise, jitter, illumination, color variation and clutter must be non-negative");
}

}  // namespace

SynthSpec SynthSpec::clean() const {
  SynthSpec s = *this;
  s.view_gain = 0.0;
  s.view_mixing = 0.0;
  s.view_offset = 0.0;
  s.noise = 0.0;
  s.color_variation = 0.0;
  s.clutter_blobs = 0;
  s.illumination = 0.0;
  s.jitter = 0;
  return s;
}

SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    if (strip(line).empty()) continue;
    if (eq == std::string::npos)
      fail(ErrorCode::kInvalidArgument, "synth spec line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      fail(ErrorCode::kInvalidArgument, "synth spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(spec, value);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kInvalidArgument, "synth spec line " + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

std::string format_synth_spec(const SynthSpec& s) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n_ids = " << s.n_ids << "\nimages_per_view = " << s.images_per_view
      << "\nwidth = " << s.width << "\nheight = " << s.height << "\nmin_regions = " << s.min_regions
      << "\nmax_regions = " << s.max_regions << "\nstripe_probability = " << s.stripe_probability
      << "\nview_gain = " << s.view_gain << "\nview_mixing = " << s.view_mixing
      << "\nview_offset = " << s.view_offset << "\ncolor_variation = " << s.color_variation
      << "\nclutter_blobs = " << s.clutter_blobs
      << "\nnoise = " << s.noise
      << "\nillumination = " << s.illumination << "\njitter = " << s.jitter << "\nseed = " << s.seed
      << '\n';
  return out.str();
}

DatasetManifest synth_dataset(const SynthSpec& spec, const std::string& out_dir) {
  validate(spec);
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"cam_a", "cam_b"}) {
    fs::create_directories(fs::path(out_dir) / sub, ec);
    if (ec) fail(ErrorCode::kIoFailure, "cannot create " + (fs::path(out_dir) / sub).string() + ": " + ec.message());
  }

  const int top = std::max(2, spec.height / 32);
  const int body_rows = spec.height - 2 * top;
  const ViewTransform view_b = make_view_transform(spec);

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (int i = 0; i < spec.n_ids; ++i) {
    const Identity id = make_identity(spec, i, body_rows);
    char name[32];
    std::snprintf(name, sizeof(name), "p%04d", i);
    for (int cam = 0; cam < 2; ++cam) {
      for (int k = 0; k < spec.images_per_view; ++k) {
        const auto rendered = render(spec, id, cam == 1 ? &view_b : nullptr,
                                     stream_seed(spec.seed, 3 + static_cast<std::uint64_t>(cam),
                                                 static_cast<std::uint64_t>(i),
                                                 static_cast<std::uint64_t>(k)));
        const std::string dir = cam == 0 ? "cam_a" : "cam_b";
        const std::string stem = dir + "/" + name + "_" + std::to_string(k);
        imaging::save_ppm(rendered.image, (fs::path(out_dir) / (stem + ".ppm")).string());
        imaging::save_pgm(rendered.mask, (fs::path(out_dir) / (stem + "_mask.pgm")).string());
        manifest.entries.push_back(
            {name, cam == 0 ? Camera::kA : Camera::kB, stem + ".ppm", stem + "_mask.pgm"});
      }
    }
  }
  save_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace reid::evalkit

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

#include "core/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"

namespace reid::evalkit {
namespace {

constexpr const char* kManifestHeader = "person_id,camera,image_path,mask_path";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest round-trip form, always with a decimal point ("1.0", "0.5").
std::string format_rate(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  std::string s = out.str();
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::uint64_t split_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased draw in [0, bound) that does not depend on the standard
// library's distribution implementation.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

CmcCurve curve_from_ranks(const std::vector<int>& ranks, std::size_t gallery_size) {
  CmcCurve curve;
  curve.rates.assign(gallery_size, 0.0);
  if (ranks.empty()) return curve;
  std::vector<double> hits(gallery_size, 0.0);
  for (int r : ranks)
    if (r >= 1) hits[static_cast<std::size_t>(r - 1)] += 1.0;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < gallery_size; ++k) {
    cumulative += hits[k];
    curve.rates[k] = cumulative / static_cast<double>(ranks.size());
  }
  return curve;
}

// 1-based rank of column `target` in a row, ties to the lower index.
int rank_in_row(const Eigen::Ref<const Eigen::VectorXd>& row, Eigen::Index target) {
  const double s = row[target];
  int rank = 1;
  for (Eigen::Index j = 0; j < row.size(); ++j)
    if (row[j] > s || (row[j] == s && j < target)) ++rank;
  return rank;
}

void check_score_shape(const Eigen::MatrixXd& scores, std::size_t probes, std::size_t gallery) {
  if (static_cast<std::size_t>(scores.rows()) != probes ||
      static_cast<std::size_t>(scores.cols()) != gallery)
    fail(ErrorCode::kDimensionMismatch, "score matrix is " + std::to_string(scores.rows()) + "x" +
                                            std::to_string(scores.cols()) + ", expected " +
                                            std::to_string(probes) + "x" + std::to_string(gallery));
}

}  // namespace

std::vector<std::string> DatasetManifest::person_ids() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& e : entries)
    if (seen.insert(e.person_id).second) ids.push_back(e.person_id);
  return ids;
}

std::string DatasetManifest::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

void DatasetManifest::validate() const {
  std::unordered_map<std::string, int> cams;
  for (const auto& e : entries) cams[e.person_id] |= 1 << static_cast<int>(e.camera);
  for (const auto& id : person_ids())
    if (cams[id] != 3)
      fail(ErrorCode::kProtocolViolation, "person '" + id + "' is not seen by both cameras");
}

DatasetManifest parse_manifest(const std::string& text, const std::string& base_dir) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kManifestHeader)
        fail(ErrorCode::kCorruptFile, std::string("manifest header must be '") + kManifestHeader + "'");
      header_seen = true;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() == 3) fields.emplace_back();
    if (fields.size() != 4)
      fail(ErrorCode::kCorruptFile, "manifest line " + std::to_string(line_no) + ": expected 4 fields");
    ManifestEntry entry;
    entry.person_id = trim(fields[0]);
    const std::string cam = trim(fields[1]);
    if (cam == "A" || cam == "a") entry.camera = Camera::kA;
    else if (cam == "B" || cam == "b") entry.camera = Camera::kB;
    else fail(ErrorCode::kCorruptFile, "manifest line " + std::to_string(line_no) + ": camera must be A or B");
    entry.image_path = trim(fields[2]);
    entry.mask_path = trim(fields[3]);
    if (entry.person_id.empty() || entry.image_path.empty())
      fail(ErrorCode::kCorruptFile, "manifest line " + std::to_string(line_no) + ": empty id or image path");
    manifest.entries.push_back(std::move(entry));
  }
  if (!header_seen) fail(ErrorCode::kCorruptFile, "manifest is empty");
  return manifest;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open manifest: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), std::filesystem::path(path).parent_path().string());
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& e : manifest.entries)
    out << e.person_id << ',' << (e.camera == Camera::kA ? 'A' : 'B') << ',' << e.image_path << ','
        << e.mask_path << '\n';
  return out.str();
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write manifest: " + path);
  out << format_manifest(manifest);
  if (!out) fail(ErrorCode::kIoFailure, "write error: " + path);
}

std::vector<SplitSpec> make_splits(const std::vector<std::string>& ids_in, double fraction,
                                   int n_splits, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    fail(ErrorCode::kInvalidArgument, "split fraction must lie strictly between 0 and 1");
  if (n_splits < 1) fail(ErrorCode::kInvalidArgument, "need at least one split");
  std::vector<std::string> ids = ids_in;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const auto n = static_cast<long long>(ids.size());
  const long long n_train = std::llround(fraction * static_cast<double>(n));
  if (n_train < 1 || n - n_train < 1)
    fail(ErrorCode::kTooFewIdentities, std::to_string(n) + " identities cannot be split with fraction " +
                                           std::to_string(fraction) + " into non-empty train and test sets");

  std::vector<SplitSpec> splits;
  for (int s = 0; s < n_splits; ++s) {
    std::mt19937_64 rng(split_mix(seed ^ split_mix(static_cast<std::uint64_t>(s))));
    std::vector<std::string> order = ids;
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[draw_below(rng, i + 1)]);
    SplitSpec spec;
    spec.seed = seed;
    spec.index = s;
    spec.train_ids.assign(order.begin(), order.begin() + n_train);
    spec.test_ids.assign(order.begin() + n_train, order.end());
    std::sort(spec.train_ids.begin(), spec.train_ids.end());
    std::sort(spec.test_ids.begin(), spec.test_ids.end());
    splits.push_back(std::move(spec));
  }
  return splits;
}

std::vector<SplitSpec> make_splits(const DatasetManifest& manifest, double fraction, int n_splits,
                                   std::uint64_t seed) {
  return make_splits(manifest.person_ids(), fraction, n_splits, seed);
}

double CmcCurve::at_rank(int rank) const {
  if (rates.empty() || rank < 1) return 0.0;
  const auto k = std::min(static_cast<std::size_t>(rank), rates.size()) - 1;
  return rates[k];
}

CmcCurve cmc_single_shot(const Eigen::MatrixXd& scores, const std::vector<std::string>& probe_ids,
                         const std::vector<std::string>& gallery_ids) {
  check_score_shape(scores, probe_ids.size(), gallery_ids.size());
  std::unordered_map<std::string, Eigen::Index> column;
  for (std::size_t j = 0; j < gallery_ids.size(); ++j)
    if (!column.emplace(gallery_ids[j], static_cast<Eigen::Index>(j)).second)
      fail(ErrorCode::kProtocolViolation,
           "single-shot gallery holds person '" + gallery_ids[j] + "' more than once");
  std::unordered_set<std::string> probes_seen;
  for (const auto& id : probe_ids)
    if (!probes_seen.insert(id).second)
      fail(ErrorCode::kProtocolViolation, "single-shot probe set holds person '" + id + "' more than once");

  std::vector<int> ranks(probe_ids.size(), 0);
  for (std::size_t i = 0; i < probe_ids.size(); ++i) {
    const auto it = column.find(probe_ids[i]);
    if (it != column.end())
      ranks[i] = rank_in_row(scores.row(static_cast<Eigen::Index>(i)).transpose(), it->second);
  }
  return curve_from_ranks(ranks, gallery_ids.size());
}

CmcCurve cmc_multi_shot(const Eigen::MatrixXd& scores, const std::vector<std::string>& probe_ids,
                        const std::vector<std::string>& gallery_ids) {
  check_score_shape(scores, probe_ids.size(), gallery_ids.size());
  std::vector<std::string> identities;
  std::unordered_map<std::string, Eigen::Index> slot;
  std::vector<Eigen::Index> slot_of_column(gallery_ids.size());
  for (std::size_t j = 0; j < gallery_ids.size(); ++j) {
    auto [it, inserted] = slot.emplace(gallery_ids[j], static_cast<Eigen::Index>(identities.size()));
    if (inserted) identities.push_back(gallery_ids[j]);
    slot_of_column[j] = it->second;
  }
  const auto n_ids = static_cast<Eigen::Index>(identities.size());
  std::vector<int> ranks(probe_ids.size(), 0);
  Eigen::VectorXd best(n_ids);
  for (std::size_t i = 0; i < probe_ids.size(); ++i) {
    best.setConstant(-std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < gallery_ids.size(); ++j) {
      auto& b = best[slot_of_column[j]];
      b = std::max(b, scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    const auto it = slot.find(probe_ids[i]);
    if (it != slot.end()) ranks[i] = rank_in_row(best, it->second);
  }
  return curve_from_ranks(ranks, identities.size());
}

CmcCurve evaluate_single_shot(const ccl::CclModel& model, const std::vector<Eigen::VectorXd>& probes,
                              const std::vector<std::string>& probe_ids,
                              const std::vector<Eigen::VectorXd>& gallery,
                              const std::vector<std::string>& gallery_ids) {
  return cmc_single_shot(ccl::score_matrix(model, gallery, probes), probe_ids, gallery_ids);
}

CmcCurve evaluate_multi_shot(const ccl::CclModel& model, const std::vector<Eigen::VectorXd>& probes,
                             const std::vector<std::string>& probe_ids,
                             const std::vector<Eigen::VectorXd>& gallery,
                             const std::vector<std::string>& gallery_ids) {
  return cmc_multi_shot(ccl::score_matrix(model, gallery, probes), probe_ids, gallery_ids);
}

Report report(const std::vector<CmcCurve>& curves, const std::vector<int>& ranks) {
  if (curves.empty()) fail(ErrorCode::kInvalidArgument, "report needs at least one curve");
  Report out;
  out.ranks = ranks;
  out.curves = static_cast<int>(curves.size());
  for (int r : ranks) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c.at_rank(r);
    out.mean_rates.push_back(sum / static_cast<double>(curves.size()));
  }
  return out;
}

std::string Report::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < ranks.size(); ++i) out << (i ? "," : "") << ranks[i];
  out << '\n';
  for (std::size_t i = 0; i < mean_rates.size(); ++i) out << (i ? ", " : "") << format_rate(mean_rates[i]);
  out << '\n';
  return out.str();
}

std::string Report::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(10) << "Rank";
  for (int r : ranks) out << std::right << std::setw(9) << r;
  out << '\n' << std::left << std::setw(10) << "Rate(%)";
  out << std::fixed << std::setprecision(2);
  for (double v : mean_rates) out << std::right << std::setw(9) << 100.0 * v;
  out << '\n';
  return out.str();
}

}  // namespace reid::evalkit

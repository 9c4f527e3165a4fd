// Copyright 2026 The s2ut Authors
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

#include "s2ut/dataset.h"

#include <cstring>
#include <filesystem>
#include <sstream>

#include "s2ut/error.h"
#include "s2ut/io.h"

namespace s2ut {

namespace fs = std::filesystem;

std::size_t Dataset::total_frames() const {
  std::size_t n = 0;
  for (const auto& x : features) n += x.length();
  return n;
}

void Dataset::validate(int feature_dim, int num_units) const {
  if (features.size() != units.size()) {
    throw IoError("dataset has " + std::to_string(features.size()) + " feature sequences and " +
                  std::to_string(units.size()) + " unit sequences");
  }
  const UnitVocab vocab(num_units);
  for (std::size_t i = 0; i < size(); ++i) {
    if (features[i].frames.cols() != std::size_t(feature_dim)) {
      throw ShapeError("sample " + std::to_string(i) + " has feature width " +
                       std::to_string(features[i].frames.cols()) + ", expected " +
                       std::to_string(feature_dim));
    }
    validate_units(units[i], vocab);
  }
}

void write_features(const std::string& path, const std::vector<FeatureSequence>& xs,
                    int feature_dim) {
  BinaryWriter w;
  w.bytes("CS2F", 4);
  w.u32(kFeaturesVersion);
  w.u64(xs.size());
  w.u32(static_cast<std::uint32_t>(feature_dim));
  for (const auto& x : xs) {
    if (x.frames.cols() != std::size_t(feature_dim)) {
      throw ShapeError("feature sequence width " + std::to_string(x.frames.cols()) +
                       " does not match V_feat=" + std::to_string(feature_dim));
    }
    w.u64(x.length());
    w.f64s(x.frames.data());
  }
  write_file_atomic(path, w.buffer());
}

std::vector<FeatureSequence> read_features(const std::string& path) {
  BinaryReader r(read_file(path), path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "CS2F", 4) != 0) throw IoError(path + " is not a features file");
  const std::uint32_t version = r.u32();
  if (version != kFeaturesVersion) {
    throw IoError(path + " has unsupported features version " + std::to_string(version));
  }
  const std::uint64_t count = r.u64();
  const std::size_t dim = r.u32();
  std::vector<FeatureSequence> xs;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t n = r.u64();
    FeatureSequence x{Tensor({std::size_t(n), dim})};
    r.f64s(x.frames.data());
    xs.push_back(std::move(x));
  }
  if (!r.at_end()) throw IoError(path + " has trailing bytes");
  return xs;
}

void write_units(const std::string& path, const std::vector<UnitSequence>& ys) {
  std::string out;
  for (const auto& y : ys) {
    out += format_units(y);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<UnitSequence> read_units(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<UnitSequence> ys;
  std::string line;
  while (std::getline(in, line)) ys.push_back(parse_units(line));
  return ys;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.split + '\t' + e.features + '\t' + e.units + '\t' + std::to_string(e.count) + '\n';
  }
  write_file_atomic(path, out);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    ManifestEntry e;
    if (!(fields >> e.split >> e.features >> e.units >> e.count)) {
      throw IoError(path + ": malformed manifest line '" + line + "'");
    }
    entries.push_back(e);
  }
  return entries;
}

void save_split(const std::string& dir, const std::string& split, const Dataset& data,
                int feature_dim, std::vector<ManifestEntry>* manifest) {
  ManifestEntry e{split, split + ".feat", split + ".units", data.size()};
  write_features((fs::path(dir) / e.features).string(), data.features, feature_dim);
  write_units((fs::path(dir) / e.units).string(), data.units);
  if (manifest) manifest->push_back(e);
}

Dataset load_split(const std::string& dir, const std::string& split) {
  const std::string manifest_path = (fs::path(dir) / "manifest.tsv").string();
  if (!fs::exists(manifest_path)) throw IoError("missing manifest " + manifest_path);
  for (const auto& e : read_manifest(manifest_path)) {
    if (e.split != split) continue;
    const std::string fpath = (fs::path(dir) / e.features).string();
    const std::string upath = (fs::path(dir) / e.units).string();
    for (const auto& p : {fpath, upath}) {
      if (!fs::exists(p)) throw IoError("missing " + split + " file " + p);
    }
    Dataset d{read_features(fpath), read_units(upath)};
    if (d.features.size() != e.count || d.units.size() != e.count) {
      throw IoError(split + " split: manifest says " + std::to_string(e.count) +
                    " samples, files hold " + std::to_string(d.features.size()) + " / " +
                    std::to_string(d.units.size()));
    }
    return d;
  }
  throw IoError(manifest_path + " has no split '" + split + "'");
}

}  // namespace s2ut

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

#ifndef S2UT_DATASET_H_
#define S2UT_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "s2ut/model.h"
#include "s2ut/unit.h"

namespace s2ut {

// Parallel source features and target units.
struct Dataset {
  std::vector<FeatureSequence> features;
  std::vector<UnitSequence> units;

  std::size_t size() const { return features.size(); }
  std::size_t total_frames() const;
  void validate(int feature_dim, int num_units) const;
};

// Binary: "CS2F", version, count, V_feat, then per sample N and N * V_feat
// little-endian float64 values.
inline constexpr std::uint32_t kFeaturesVersion = 1;
void write_features(const std::string& path, const std::vector<FeatureSequence>& xs,
                    int feature_dim);
std::vector<FeatureSequence> read_features(const std::string& path);

// Text: one sample per line, space-separated unit ids.
void write_units(const std::string& path, const std::vector<UnitSequence>& ys);
std::vector<UnitSequence> read_units(const std::string& path);

struct ManifestEntry {
  std::string split;
  std::string features;  // relative to the manifest directory
  std::string units;
  std::size_t count = 0;
};

// Text: "split<TAB>features<TAB>units<TAB>count" per line.
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

void save_split(const std::string& dir, const std::string& split, const Dataset& data,
                int feature_dim, std::vector<ManifestEntry>* manifest);
// Reads one split through dir/manifest.tsv. Missing files raise IoError
// naming the expected path.
Dataset load_split(const std::string& dir, const std::string& split);

}  // namespace s2ut

#endif  // S2UT_DATASET_H_

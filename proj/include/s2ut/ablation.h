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

#ifndef S2UT_ABLATION_H_
#define S2UT_ABLATION_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "s2ut/config.h"
#include "s2ut/dataset.h"

namespace s2ut {

struct AblationRow {
  std::string name;
  bool pretrain = false;
  bool glat = false;
  bool kd = false;
  bool nmla = false;
  double bleu = 0.0;
};

struct AblationOutcome {
  std::uint64_t seed = 0;
  double ar_bleu = 0.0;
  // no-pretrain, no-glat, no-kd, full-stage1, full+nmla
  std::vector<AblationRow> rows;

  const AblationRow& row(const std::string& name) const;
};

using ProgressFn = std::function<void(const std::string&)>;

// Trains the AR baseline, distills the training set with it, then the five
// technique combinations, and scores each on `test`. Seeds for data order,
// dropout, glancing and initialization derive from `seed`. When out_dir is
// non-empty, checkpoints, metrics logs and the table are written there.
AblationOutcome run_ablation(const ExperimentConfig& cfg, const Dataset& train_set,
                             const Dataset& test, std::uint64_t seed,
                             const std::string& out_dir = "", const ProgressFn& progress = {});

std::string ablation_table(const AblationOutcome& outcome);
std::string ablation_tsv(const AblationOutcome& outcome);

}  // namespace s2ut

#endif  // S2UT_ABLATION_H_

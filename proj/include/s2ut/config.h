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

#ifndef S2UT_CONFIG_H_
#define S2UT_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "s2ut/model.h"
#include "s2ut/synth.h"
#include "s2ut/trainer.h"

namespace s2ut {

struct ExperimentConfig {
  SynthTaskSpec data;
  ModelConfig model;
  TrainConfig train;
  std::vector<std::size_t> bucket_edges{120, 240};
  std::size_t bench_warmup = 3;
  std::size_t bench_repeats = 3;
  std::string bench_split = "test";
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t eval_limit = 0;

  // Copies shared fields (unit count, feature width, upsample factor) from
  // the data section into the model section, then validates everything.
  void finalize();
};

// INI text: [data], [model], [train], [bench], [ablation] sections with
// key = value lines. Unknown sections or keys raise ConfigError naming them.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// The same format, every key written out.
std::string format_config(const ExperimentConfig& cfg);

}  // namespace s2ut

#endif  // S2UT_CONFIG_H_

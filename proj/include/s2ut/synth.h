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

#ifndef S2UT_SYNTH_H_
#define S2UT_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "s2ut/dataset.h"

namespace s2ut {

// Toy translation task. A phone string is rendered as noisy source frames;
// the target side swaps some adjacent phones, expands each phone to 1-3
// prototype vectors, adds noise, and quantizes with K-means.
struct SynthTaskSpec {
  int alphabet = 12;
  int min_duration = 2;
  int max_duration = 5;
  int feature_dim = 8;
  double noise = 0.1;
  int num_units = 16;
  int min_expansion = 1;
  int max_expansion = 3;
  double p_swap = 0.15;
  int min_phones = 3;
  int max_phones = 20;
  std::size_t train_size = 2000;
  std::size_t valid_size = 200;
  std::size_t test_size = 200;
  // Optional extra split with its own length range, for latency runs.
  std::size_t bench_size = 0;
  int bench_min_phones = 5;
  int bench_max_phones = 80;
  std::uint64_t seed = 1;
  int upsample = 2;  // used only for the feasibility check
  int kmeans_iterations = 50;
  int kmeans_restarts = 10;

  void validate() const;
};

struct SynthSample {
  std::vector<int> phones;         // source order
  std::vector<int> target_phones;  // after swaps
  std::vector<int> prototypes;     // expanded target, before quantization
  Tensor source;                   // N x feature_dim
  Tensor target;                   // one noisy prototype vector per row
};

struct SynthData {
  Dataset train, valid, test, bench;
  std::vector<std::vector<int>> expansion;  // phone -> prototype ids
  Tensor phone_embeddings;                  // alphabet x feature_dim
  Tensor prototypes;                        // num_units x feature_dim
  Tensor codebook;
  double infeasible_fraction = 0.0;  // train samples too long for CTC
  double mean_frames_per_phone = 0.0;
  std::vector<std::string> warnings;
};

// Deterministic in spec.seed. Sample i of the whole corpus uses a seed
// derived from (seed, i); splits take consecutive disjoint id ranges.
SynthData generate_dataset(const SynthTaskSpec& spec);

// Expansion table only, derived from spec.seed.
std::vector<std::vector<int>> expansion_table(const SynthTaskSpec& spec);
SynthSample draw_sample(const SynthTaskSpec& spec, const std::vector<std::vector<int>>& table,
                        const Tensor& phone_embeddings, const Tensor& prototypes,
                        std::uint64_t sample_id, int min_phones, int max_phones);

// Fraction of samples whose target cannot be aligned within
// T = upsample * floor(N / 4).
double infeasible_fraction(const Dataset& data, int upsample);

// Writes <split>.feat, <split>.units for each split and manifest.tsv.
void write_dataset(const SynthData& data, const SynthTaskSpec& spec, const std::string& dir);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace s2ut

#endif  // S2UT_SYNTH_H_

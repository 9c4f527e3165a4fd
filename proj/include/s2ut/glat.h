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

#ifndef S2UT_GLAT_H_
#define S2UT_GLAT_H_

#include <cstdint>
#include <vector>

#include "s2ut/autograd.h"
#include "s2ut/ctc.h"
#include "s2ut/unit.h"

namespace s2ut {

struct GlancingSchedule {
  double start_ratio = 0.5;
  double end_ratio = 0.3;
  std::size_t decay_steps = 100000;

  void validate() const;
};

// Linear from start_ratio at step 0 to end_ratio at decay_steps, flat after.
double ratio_at(std::size_t step, const GlancingSchedule& sched);

// Which positions may be replaced.
enum class GlancePositions { kAll, kMismatched };
// How the first-pass distance is measured: Hamming distance of the argmax
// path, or the expected number of positions that disagree with A*.
enum class GlanceDistance { kGreedy, kExpected };

struct GlanceOptions {
  GlancePositions positions = GlancePositions::kAll;
  GlanceDistance distance = GlanceDistance::kGreedy;
};

struct GlancePlan {
  Alignment best;                       // A*, Viterbi path of y
  double distance = 0.0;                // d
  std::vector<std::size_t> positions;   // replaced rows, sampling order
  std::vector<int> tokens;              // A* token at each replaced row
  std::size_t n_replaced() const { return positions.size(); }
};

// Per-item seed for batched glancing.
inline std::uint64_t glance_seed(std::uint64_t base, std::uint64_t index) {
  return base ^ index;
}

// Seeded permutation of 0..n-1. Its prefixes are the sampled position sets.
std::vector<std::size_t> glance_order(std::size_t n, std::uint64_t seed);

// Chooses ceil(ratio * d) rows to replace. Throws InfeasibleAlignment when
// y does not fit the lattice.
GlancePlan plan_glance(const LogProbLattice& first_pass, const UnitSequence& y,
                       double ratio, std::uint64_t seed,
                       const GlanceOptions& opts = {});

// Decoder input with the planned rows replaced by token embeddings.
Var apply_glance(const Var& e, const Var& embeddings, const GlancePlan& plan);

struct GlanceResult {
  Tensor input;
  std::size_t n_replaced = 0;
};

GlanceResult glance(const Tensor& e, const LogProbLattice& first_pass,
                    const UnitSequence& y, double ratio, std::uint64_t seed,
                    const Tensor& embeddings, const GlanceOptions& opts = {});

}  // namespace s2ut

#endif  // S2UT_GLAT_H_

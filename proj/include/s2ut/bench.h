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

#ifndef S2UT_BENCH_H_
#define S2UT_BENCH_H_

#include <optional>
#include <string>
#include <vector>

#include "s2ut/dataset.h"
#include "s2ut/model.h"

namespace s2ut {

struct BenchRow {
  std::size_t lo = 0;
  std::optional<std::size_t> hi;  // absent for the last, open bucket
  std::size_t count = 0;
  double ar_ms = 0.0;   // mean wallclock per sample
  double nar_ms = 0.0;
  std::optional<double> speedup;
  double ar_steps = 0.0;   // mean decoder passes per sample
  double nar_passes = 0.0;
};

struct BenchReport {
  std::string hardware;
  std::vector<BenchRow> rows;
  std::size_t samples = 0;
  double overall_speedup = 0.0;  // mean AR time over mean NAR time
  // Samples whose decoder pass count broke the accounting rule: AR passes
  // equal to output length, exactly one NAR pass.
  std::size_t ar_step_mismatches = 0;
  std::size_t nar_pass_mismatches = 0;

  std::string table() const;
  std::string tsv() const;
};

// CPU model and core count, for report headers.
std::string hardware_description();

// Times `ar` against `nar` (any two models with the same encoder shape).
// Batch size 1, single thread. Buckets by source frame count: [0, e0),
// [e0, e1), ..., [e_last, inf). The first `warmup` samples are decoded once
// per model before timing starts.
// Each sample is timed `repeats` times per model and the fastest run kept,
// which filters out scheduler hiccups.
BenchReport bench_latency(const S2utModel& ar, const S2utModel& nar, const Dataset& data,
                          const std::vector<std::size_t>& edges, std::size_t warmup = 3,
                          std::size_t repeats = 3);

}  // namespace s2ut

#endif  // S2UT_BENCH_H_

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

#ifndef S2UT_EVAL_H_
#define S2UT_EVAL_H_

#include <vector>

#include "s2ut/dataset.h"
#include "s2ut/model.h"
#include "s2ut/unit.h"

namespace s2ut {

// Corpus BLEU over unit n-grams, orders 1-4, uniform weights. Orders >= 2
// with no matches use add-one smoothing. Brevity penalty when the
// hypotheses are shorter than the references. All-empty hypotheses score 0.
double unit_bleu(const std::vector<UnitSequence>& hyps, const std::vector<UnitSequence>& refs);

struct EvalResult {
  double bleu = 0.0;
  std::vector<UnitSequence> hyps;
  std::size_t truncated = 0;
};

// Decodes the first `limit` samples (all when 0) and scores them.
EvalResult evaluate(const S2utModel& model, const Dataset& data, std::size_t limit = 0);

}  // namespace s2ut

#endif  // S2UT_EVAL_H_

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

#ifndef S2UT_DISTILL_H_
#define S2UT_DISTILL_H_

#include "s2ut/dataset.h"
#include "s2ut/model.h"

namespace s2ut {

struct DistillResult {
  Dataset data;                  // same features, teacher targets
  std::size_t kept_original = 0; // empty teacher outputs replaced by the reference
  std::size_t truncated = 0;     // teacher hit the length cap
};

// Greedy teacher decode of every source.
DistillResult distill(const S2utModel& teacher, const Dataset& data);

}  // namespace s2ut

#endif  // S2UT_DISTILL_H_

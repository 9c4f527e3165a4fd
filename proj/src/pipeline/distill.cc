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

#include "s2ut/distill.h"

namespace s2ut {

DistillResult distill(const S2utModel& teacher, const Dataset& data) {
  data.validate(teacher.config().feature_dim, teacher.config().num_units);
  DistillResult r;
  r.data.features = data.features;
  for (std::size_t i = 0; i < data.size(); ++i) {
    DecodeResult d = teacher.decode(data.features[i]);
    if (d.truncated) ++r.truncated;
    if (d.units.units.empty()) {
      ++r.kept_original;
      r.data.units.push_back(data.units[i]);
    } else {
      r.data.units.push_back(std::move(d.units));
    }
  }
  return r;
}

}  // namespace s2ut

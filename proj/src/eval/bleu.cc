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

#include <algorithm>
#include <cmath>
#include <map>

#include "s2ut/error.h"
#include "s2ut/eval.h"

namespace s2ut {

namespace {

using Ngram = std::vector<int>;

std::map<Ngram, std::size_t> count_ngrams(const std::vector<int>& s, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[Ngram(s.begin() + i, s.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double unit_bleu(const std::vector<UnitSequence>& hyps, const std::vector<UnitSequence>& refs) {
  if (hyps.size() != refs.size()) {
    throw RangeError("unit_bleu got " + std::to_string(hyps.size()) + " hypotheses and " +
                     std::to_string(refs.size()) + " references");
  }
  if (hyps.empty()) throw RangeError("unit_bleu needs at least one pair");
  constexpr std::size_t kOrder = 4;
  std::size_t matches[kOrder] = {}, totals[kOrder] = {};
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto& h = hyps[i].units;
    const auto& r = refs[i].units;
    hyp_len += h.size();
    ref_len += r.size();
    for (std::size_t n = 1; n <= kOrder; ++n) {
      const auto hc = count_ngrams(h, n);
      const auto rc = count_ngrams(r, n);
      for (const auto& [g, c] : hc) {
        auto it = rc.find(g);
        if (it != rc.end()) matches[n - 1] += std::min(c, it->second);
      }
      if (h.size() >= n) totals[n - 1] += h.size() - n + 1;
    }
  }
  if (hyp_len == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kOrder; ++n) {
    double p;
    if (n > 0 && matches[n] == 0) {
      p = 1.0 / double(totals[n] + 1);
    } else {
      p = double(matches[n]) / double(totals[n]);
    }
    log_sum += std::log(p);
  }
  const double bp =
      hyp_len < ref_len ? std::exp(1.0 - double(ref_len) / double(hyp_len)) : 1.0;
  return bp * std::exp(log_sum / double(kOrder));
}

EvalResult evaluate(const S2utModel& model, const Dataset& data, std::size_t limit) {
  const std::size_t n = limit == 0 ? data.size() : std::min(limit, data.size());
  EvalResult r;
  std::vector<UnitSequence> refs;
  for (std::size_t i = 0; i < n; ++i) {
    DecodeResult d = model.decode(data.features[i]);
    if (d.truncated) ++r.truncated;
    r.hyps.push_back(std::move(d.units));
    refs.push_back(data.units[i]);
  }
  r.bleu = n == 0 ? 0.0 : unit_bleu(r.hyps, refs);
  return r;
}

}  // namespace s2ut

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

#ifndef S2UT_NMLA_H_
#define S2UT_NMLA_H_

#include <map>
#include <utility>

#include "s2ut/ctc.h"

namespace s2ut {

// Real-valued counts of ordered unit pairs. Blank never appears in a key.
class BigramTable {
 public:
  using Key = std::pair<int, int>;

  double at(int u, int v) const;
  void add(int u, int v, double count);
  double total() const;
  const std::map<Key, double>& counts() const { return counts_; }

 private:
  std::map<Key, double> counts_;
};

// Counts of adjacent pairs in y.
BigramTable reference_bigrams(const UnitSequence& y);

// E[count of (u, v) as adjacent pair in collapse(A)] under the factorized
// alignment distribution. Exact, O(T K^2). Every (u, v) pair gets an entry.
BigramTable expected_bigrams(const LogProbLattice& lattice);

// 1 - F1 of clipped bigram matching; 0 when both tables are empty.
double nmla_loss_from_tables(const BigramTable& expected,
                             const BigramTable& reference);

struct NmlaLossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d logp
  double expected_total = 0.0;
  double match = 0.0;
};

// Bigram F1 loss against y. A min(E, R) term passes gradient only where the
// expected count is strictly below the reference count.
NmlaLossResult nmla_loss_grad(const LogProbLattice& lattice, const UnitSequence& y);

}  // namespace s2ut

#endif  // S2UT_NMLA_H_

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

#ifndef S2UT_UNIT_H_
#define S2UT_UNIT_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace s2ut {

// K real units with ids 0..K-1 plus the blank at id K.
class UnitVocab {
 public:
  explicit UnitVocab(int num_units);

  int num_units() const { return num_units_; }
  int blank() const { return num_units_; }
  int size() const { return num_units_ + 1; }
  bool is_unit(int id) const { return id >= 0 && id < num_units_; }

 private:
  int num_units_;
};

// Blank-free target sequence Y. May be empty.
struct UnitSequence {
  std::vector<int> units;

  std::size_t size() const { return units.size(); }
  bool empty() const { return units.empty(); }
  int operator[](std::size_t i) const { return units[i]; }
  bool operator==(const UnitSequence&) const = default;
};

// Length-T sequence over units plus blank.
struct Alignment {
  std::vector<int> tokens;

  std::size_t size() const { return tokens.size(); }
  int operator[](std::size_t i) const { return tokens[i]; }
  bool operator==(const Alignment&) const = default;
  auto operator<=>(const Alignment&) const = default;
};

// Merges runs of identical tokens, then drops blanks.
UnitSequence collapse(const Alignment& a, const UnitVocab& vocab);

// Shortest T for which some alignment collapses to y: one slot per unit
// plus a separating blank between each pair of equal neighbours.
std::size_t min_alignment_length(const UnitSequence& y);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// Brute force over all (K+1)^T strings; result sorted lexicographically.
// Throws RangeError naming the cap when (K+1)^T exceeds it.
std::vector<Alignment> enumerate_preimage(
    const UnitSequence& y, std::size_t length, const UnitVocab& vocab,
    std::uint64_t cap = kDefaultEnumerationCap);

// Calls f on every one of the (K+1)^T strings in lexicographic order.
// Shared by the enumeration oracles of the loss modules.
void for_each_alignment(std::size_t length, const UnitVocab& vocab,
                        std::uint64_t cap,
                        const std::function<void(const Alignment&)>& f);

void validate_units(const UnitSequence& y, const UnitVocab& vocab);

// One line of space-separated decimal ids.
std::string format_units(const UnitSequence& y);
UnitSequence parse_units(const std::string& line);

}  // namespace s2ut

#endif  // S2UT_UNIT_H_

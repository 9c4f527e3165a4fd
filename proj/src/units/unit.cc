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

#include "s2ut/unit.h"

#include <sstream>

#include "s2ut/error.h"

namespace s2ut {

UnitVocab::UnitVocab(int num_units) : num_units_(num_units) {
  if (num_units < 1) {
    throw RangeError("unit vocabulary needs K >= 1, got " +
                     std::to_string(num_units));
  }
}

UnitSequence collapse(const Alignment& a, const UnitVocab& vocab) {
  UnitSequence y;
  int prev = -1;
  for (int tok : a.tokens) {
    if (tok < 0 || tok > vocab.blank()) {
      throw RangeError("alignment token " + std::to_string(tok) +
                       " outside [0, " + std::to_string(vocab.blank()) + "]");
    }
    if (tok != prev && tok != vocab.blank()) y.units.push_back(tok);
    prev = tok;
  }
  return y;
}

std::size_t min_alignment_length(const UnitSequence& y) {
  std::size_t n = y.size();
  for (std::size_t i = 1; i < y.size(); ++i) n += y[i] == y[i - 1];
  return n;
}

void validate_units(const UnitSequence& y, const UnitVocab& vocab) {
  for (int u : y.units) {
    if (!vocab.is_unit(u)) {
      throw RangeError("unit id " + std::to_string(u) + " outside [0, " +
                       std::to_string(vocab.num_units()) + ")");
    }
  }
}

void for_each_alignment(std::size_t length, const UnitVocab& vocab,
                        std::uint64_t cap,
                        const std::function<void(const Alignment&)>& f) {
  const auto base = static_cast<std::uint64_t>(vocab.size());
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (total > cap / base) {
      throw RangeError("enumeration of " + std::to_string(base) + "^" +
                       std::to_string(length) +
                       " alignments exceeds the cap of " + std::to_string(cap));
    }
    total *= base;
  }
  if (total > cap) {
    throw RangeError("enumeration exceeds the cap of " + std::to_string(cap));
  }
  Alignment a;
  a.tokens.assign(length, 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    f(a);
    // Odometer increment, last position fastest.
    for (std::size_t i = length; i-- > 0;) {
      if (++a.tokens[i] < vocab.size()) break;
      a.tokens[i] = 0;
    }
  }
}

std::vector<Alignment> enumerate_preimage(const UnitSequence& y,
                                          std::size_t length,
                                          const UnitVocab& vocab,
                                          std::uint64_t cap) {
  if (length == 0) throw RangeError("alignment length must be at least 1");
  validate_units(y, vocab);
  std::vector<Alignment> out;
  for_each_alignment(length, vocab, cap, [&](const Alignment& a) {
    if (collapse(a, vocab) == y) out.push_back(a);
  });
  return out;
}

std::string format_units(const UnitSequence& y) {
  std::string s;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(y[i]);
  }
  return s;
}

UnitSequence parse_units(const std::string& line) {
  UnitSequence y;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 0) {
      throw IoError("malformed unit id '" + tok + "'");
    }
    y.units.push_back(v);
  }
  return y;
}

}  // namespace s2ut

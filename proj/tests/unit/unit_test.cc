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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.h"
#include "s2ut/error.h"
#include "s2ut/unit.h"

namespace s2ut {
namespace {

// Vocab {a, b} with blank written as B.
constexpr int a = 0, b = 1, B = 2;
const UnitVocab kAb(2);

TEST(UnitVocab, BlankIsLastId) {
  EXPECT_EQ(kAb.blank(), 2);
  EXPECT_EQ(kAb.size(), 3);
  EXPECT_THROW(UnitVocab(0), RangeError);
}

TEST(Collapse, MergesThenDropsBlanks) {
  EXPECT_EQ(collapse({{a, a, B, b}}, kAb), (UnitSequence{{a, b}}));
  EXPECT_EQ(collapse({{B, B, B}}, kAb), UnitSequence{});
  EXPECT_EQ(collapse({{a, B, a, a, b}}, kAb), (UnitSequence{{a, a, b}}));
  EXPECT_THROW(collapse({{a, 3}}, kAb), RangeError);
}

TEST(Collapse, IdempotentOnRandomAlignments) {
  std::mt19937_64 rng(1);
  const UnitVocab vocab(3);
  std::uniform_int_distribution<int> tok(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    Alignment al;
    al.tokens.resize(1 + trial % 9);
    for (auto& t : al.tokens) t = tok(rng);
    const UnitSequence y = collapse(al, vocab);
    for (int u : y.units) EXPECT_NE(u, vocab.blank());
    // Reading y back as an alignment: merging would change it only if it
    // had equal neighbours, so compare against the merge-only view.
    Alignment as_alignment{y.units};
    UnitSequence twice = collapse(as_alignment, vocab);
    UnitSequence merged;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i == 0 || y[i] != y[i - 1]) merged.units.push_back(y[i]);
    }
    EXPECT_EQ(twice, merged);
    EXPECT_EQ(collapse(Alignment{twice.units}, vocab), twice);
  }
}

TEST(Preimage, SingleUnitLengthTwo) {
  // All 9 strings of length 2 filtered by collapse: aa, aB, Ba.
  auto pre = enumerate_preimage({{a}}, 2, kAb);
  std::set<Alignment> got(pre.begin(), pre.end());
  std::set<Alignment> want{{{a, a}}, {{a, B}}, {{B, a}}};
  EXPECT_EQ(got, want);
}

TEST(Preimage, RepeatedUnitNeedsSeparator) {
  EXPECT_TRUE(enumerate_preimage({{a, a}}, 2, kAb).empty());
  auto empty = enumerate_preimage({}, 2, kAb);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0], (Alignment{{B, B}}));
}

TEST(Preimage, CapIsEnforcedAndNamed) {
  try {
    enumerate_preimage({{a}}, 10, kAb, 1000);
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos);
  }
}

TEST(Preimage, SoundAndCompleteSmallCases) {
  std::mt19937_64 rng(2);
  for (int K = 1; K <= 3; ++K) {
    const UnitVocab vocab(K);
    for (std::size_t T = 1; T <= 6; ++T) {
      const UnitSequence y = testing::random_units(rng() % 4, K, rng);
      auto pre = enumerate_preimage(y, T, vocab);
      std::set<Alignment> members(pre.begin(), pre.end());
      std::size_t count = 0;
      for_each_alignment(T, vocab, kDefaultEnumerationCap, [&](const Alignment& al) {
        const bool hit = collapse(al, vocab) == y;
        EXPECT_EQ(hit, members.count(al) == 1);
        count += hit;
      });
      EXPECT_EQ(count, pre.size());
    }
  }
}

TEST(MinAlignmentLength, Examples) {
  EXPECT_EQ(min_alignment_length({{a, b}}), 2u);
  EXPECT_EQ(min_alignment_length({{a, a}}), 3u);
  EXPECT_EQ(min_alignment_length({{a, a, a, b}}), 6u);
  EXPECT_TRUE(enumerate_preimage({{a, a, a, b}}, 5, kAb).empty());
  EXPECT_FALSE(enumerate_preimage({{a, a, a, b}}, 6, kAb).empty());
}

TEST(MinAlignmentLength, IsTheFeasibilityThreshold) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int K = 1 + static_cast<int>(rng() % 2);
    const UnitVocab vocab(K);
    const UnitSequence y = testing::random_units(rng() % 5, K, rng);
    const std::size_t m = min_alignment_length(y);
    for (std::size_t T = 1; T <= 8; ++T) {
      EXPECT_EQ(!enumerate_preimage(y, T, vocab).empty(), T >= m) << "T=" << T;
    }
  }
}

TEST(UnitText, FormatAndParse) {
  UnitSequence y{{3, 0, 12}};
  EXPECT_EQ(format_units(y), "3 0 12");
  EXPECT_EQ(parse_units("3 0 12"), y);
  EXPECT_EQ(parse_units(""), UnitSequence{});
  EXPECT_THROW(parse_units("3 x"), IoError);
}

}  // namespace
}  // namespace s2ut

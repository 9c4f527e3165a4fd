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

#ifndef S2UT_CTC_H_
#define S2UT_CTC_H_

#include <cmath>
#include <limits>

#include "s2ut/tensor.h"
#include "s2ut/unit.h"

namespace s2ut {

// Log-probability of an impossible event. Anything below kLogZeroThreshold
// is treated as zero probability.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr double kLogZeroThreshold = -1e30;
inline bool is_log_zero(double v) { return v < kLogZeroThreshold; }

inline double log_add(double a, double b) {
  if (is_log_zero(a)) return b;
  if (is_log_zero(b)) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// T x (K+1) per-position log-probabilities, blank in the last column.
// Construction checks that every row normalizes within kLatticeTolerance.
class LogProbLattice {
 public:
  static constexpr double kTolerance = 1e-9;

  explicit LogProbLattice(Tensor log_probs);
  static LogProbLattice from_probs(const Tensor& probs);
  // Row-wise log-softmax of unnormalized scores.
  static LogProbLattice from_scores(const Tensor& scores);

  std::size_t length() const { return log_probs_.rows(); }
  std::size_t width() const { return log_probs_.cols(); }
  UnitVocab vocab() const { return UnitVocab(static_cast<int>(width()) - 1); }
  int blank() const { return static_cast<int>(width()) - 1; }

  double logp(std::size_t t, int v) const {
    return log_probs_(t, static_cast<std::size_t>(v));
  }
  double prob(std::size_t t, int v) const { return std::exp(logp(t, v)); }
  const Tensor& log_probs() const { return log_probs_; }

 private:
  Tensor log_probs_;
};

// log P(y | X), summed over every alignment collapsing to y. Returns kLogZero
// when the lattice is shorter than min_alignment_length(y).
double ctc_log_likelihood(const LogProbLattice& lattice, const UnitSequence& y);

struct CtcLossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d logp, same shape as the lattice
};

// -log P(y | X) with its gradient: minus the per-position posterior of each
// symbol. Throws InfeasibleAlignment when the lattice is too short.
CtcLossResult ctc_loss_grad(const LogProbLattice& lattice, const UnitSequence& y);

// Most probable alignment in the preimage of y. Ties resolve toward the
// smaller expanded-state index during backtrace.
Alignment viterbi_alignment(const LogProbLattice& lattice, const UnitSequence& y);

// Per-position argmax (lowest id on ties).
Alignment argmax_alignment(const LogProbLattice& lattice);

// Argmax then collapse. One pass, no search.
UnitSequence greedy_decode(const LogProbLattice& lattice);

}  // namespace s2ut

#endif  // S2UT_CTC_H_

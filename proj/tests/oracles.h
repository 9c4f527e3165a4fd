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

#ifndef S2UT_TESTS_ORACLES_H_
#define S2UT_TESTS_ORACLES_H_

// Brute-force references used only by tests. Nothing here calls the DP code
// it is meant to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "s2ut/autograd.h"
#include "s2ut/ctc.h"
#include "s2ut/nmla.h"
#include "s2ut/ops.h"
#include "s2ut/unit.h"

namespace s2ut::testing {

inline double alignment_log_prob(const LogProbLattice& lat, const Alignment& a) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += lat.logp(t, a[t]);
  return s;
}

// log of the summed probability of every alignment that collapses to y.
inline double enumerate_log_likelihood(const LogProbLattice& lat, const UnitSequence& y) {
  const UnitVocab vocab = lat.vocab();
  double total = 0.0;
  for_each_alignment(lat.length(), vocab, kDefaultEnumerationCap, [&](const Alignment& a) {
    if (collapse(a, vocab) == y) total += std::exp(alignment_log_prob(lat, a));
  });
  return total > 0.0 ? std::log(total) : -std::numeric_limits<double>::infinity();
}

struct BruteViterbi {
  Alignment best;
  double log_prob = -std::numeric_limits<double>::infinity();
};

inline BruteViterbi enumerate_viterbi(const LogProbLattice& lat, const UnitSequence& y) {
  BruteViterbi out;
  for (const auto& a : enumerate_preimage(y, lat.length(), lat.vocab())) {
    const double lp = alignment_log_prob(lat, a);
    if (lp > out.log_prob) {
      out.log_prob = lp;
      out.best = a;
    }
  }
  return out;
}

// Expected bigram counts of collapse(A) by summing over all alignments.
inline std::vector<double> enumerate_expected_bigrams(const LogProbLattice& lat) {
  const UnitVocab vocab = lat.vocab();
  const auto K = static_cast<std::size_t>(vocab.num_units());
  std::vector<double> e(K * K, 0.0);
  for_each_alignment(lat.length(), vocab, kDefaultEnumerationCap, [&](const Alignment& a) {
    const double p = std::exp(alignment_log_prob(lat, a));
    const UnitSequence y = collapse(a, vocab);
    for (std::size_t i = 1; i < y.size(); ++i) {
      e[static_cast<std::size_t>(y[i - 1]) * K + static_cast<std::size_t>(y[i])] += p;
    }
  });
  return e;
}

// E[max(|collapse(A)| - 1, 0)].
inline double enumerate_expected_bigram_total(const LogProbLattice& lat) {
  const UnitVocab vocab = lat.vocab();
  double acc = 0.0;
  for_each_alignment(lat.length(), vocab, kDefaultEnumerationCap, [&](const Alignment& a) {
    const double p = std::exp(alignment_log_prob(lat, a));
    const auto m = collapse(a, vocab).size();
    acc += p * static_cast<double>(m > 0 ? m - 1 : 0);
  });
  return acc;
}

// Bigram F1 loss computed straight from the enumerated expectation.
inline double enumerate_nmla_loss(const LogProbLattice& lat, const UnitSequence& y) {
  const auto K = static_cast<std::size_t>(lat.vocab().num_units());
  const auto e = enumerate_expected_bigrams(lat);
  std::vector<double> r(K * K, 0.0);
  for (std::size_t i = 1; i < y.size(); ++i) {
    r[static_cast<std::size_t>(y[i - 1]) * K + static_cast<std::size_t>(y[i])] += 1.0;
  }
  double se = 0.0, sr = 0.0, match = 0.0;
  for (std::size_t g = 0; g < K * K; ++g) {
    se += e[g];
    sr += r[g];
    match += std::min(e[g], r[g]);
  }
  if (se + sr <= 0.0) return 0.0;
  return 1.0 - 2.0 * match / (se + sr);
}

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -2.0,
                            double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

inline Tensor row_log_softmax(const Tensor& scores) {
  return LogProbLattice::from_scores(scores).log_probs();
}

// Chain rule through the row-wise log-softmax: d/dz of a function whose
// gradient w.r.t. the log-probabilities is g.
inline Tensor log_softmax_backward(const Tensor& log_probs, const Tensor& g) {
  Tensor out(g.shape());
  for (std::size_t t = 0; t < g.rows(); ++t) {
    double gs = 0.0;
    for (std::size_t v = 0; v < g.cols(); ++v) gs += g(t, v);
    for (std::size_t v = 0; v < g.cols(); ++v) {
      out(t, v) = g(t, v) - std::exp(log_probs(t, v)) * gs;
    }
  }
  return out;
}

inline UnitSequence random_units(std::size_t m, int K, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, K - 1);
  UnitSequence y;
  for (std::size_t i = 0; i < m; ++i) y.units.push_back(u(rng));
  return y;
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Central differences of a scalar function of one tensor.
inline Tensor finite_difference(const std::function<double(const Tensor&)>& f,
                                const Tensor& x, double h = 1e-4) {
  Tensor g(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Compares backward() against central differences for every entry of every
// input. f must build a scalar from the given leaves.
inline GradCheckReport grad_check(const std::function<Var(const std::vector<Var>&)>& f,
                                  const std::vector<Tensor>& inputs, double h = 1e-4) {
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(leaf(t));
  backward(f(leaves));
  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = leaves[k]->ensure_grad();
    auto eval = [&](const Tensor& probe) {
      NoGradGuard guard;
      std::vector<Var> vs;
      for (std::size_t j = 0; j < inputs.size(); ++j) {
        vs.push_back(constant(j == k ? probe : inputs[j]));
      }
      return f(vs)->value[0];
    };
    const Tensor numeric = finite_difference(eval, inputs[k], h);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      report.max_rel_error = std::max(report.max_rel_error, rel_error(analytic[i], numeric[i]));
      ++report.checked;
    }
  }
  return report;
}

// Random weighted sum so that every output entry influences the scalar.
inline Var weighted_sum(const Var& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum(mul(x, constant(random_tensor(x->value.shape(), rng, -1.0, 1.0))));
}

}  // namespace s2ut::testing

#endif  // S2UT_TESTS_ORACLES_H_

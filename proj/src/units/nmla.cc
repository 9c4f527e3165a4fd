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

#include "s2ut/nmla.h"

#include <algorithm>
#include <vector>

namespace s2ut {
namespace {

struct Dense {
  std::size_t T = 0, K = 0;
  std::vector<double> p;  // T x (K+1)
  std::vector<double> q;  // T x K, q[t][v]: mass of "next non-blank is v"

  double P(std::size_t t, std::size_t v) const { return t < T ? p[t * (K + 1) + v] : 0.0; }
};

// q_t(v) = P_{t+1}(v) + P_{t+1}(blank) q_{t+1}(v), q_{T-1} = 0.
Dense suffix_tables(const LogProbLattice& lat) {
  Dense d;
  d.T = lat.length();
  d.K = lat.width() - 1;
  d.p.resize(d.T * (d.K + 1));
  for (std::size_t t = 0; t < d.T; ++t) {
    for (std::size_t v = 0; v <= d.K; ++v) d.p[t * (d.K + 1) + v] = lat.prob(t, static_cast<int>(v));
  }
  d.q.assign(d.T * d.K, 0.0);
  for (std::size_t t = d.T - 1; t-- > 0;) {
    const double blank = d.P(t + 1, d.K);
    for (std::size_t v = 0; v < d.K; ++v) {
      d.q[t * d.K + v] = d.P(t + 1, v) + blank * d.q[(t + 1) * d.K + v];
    }
  }
  return d;
}

std::vector<double> dense_expected(const Dense& d) {
  std::vector<double> e(d.K * d.K, 0.0);
  for (std::size_t t = 0; t < d.T; ++t) {
    for (std::size_t u = 0; u < d.K; ++u) {
      const double pu = d.P(t, u);
      if (pu == 0.0) continue;
      for (std::size_t v = 0; v < d.K; ++v) {
        double r = d.q[t * d.K + v];
        if (u == v) r -= d.P(t + 1, v);
        e[u * d.K + v] += pu * r;
      }
    }
  }
  return e;
}

}  // namespace

double BigramTable::at(int u, int v) const {
  auto it = counts_.find({u, v});
  return it == counts_.end() ? 0.0 : it->second;
}

void BigramTable::add(int u, int v, double count) { counts_[{u, v}] += count; }

double BigramTable::total() const {
  double s = 0.0;
  for (const auto& [k, c] : counts_) s += c;
  return s;
}

BigramTable reference_bigrams(const UnitSequence& y) {
  BigramTable table;
  for (std::size_t i = 1; i < y.size(); ++i) table.add(y[i - 1], y[i], 1.0);
  return table;
}

BigramTable expected_bigrams(const LogProbLattice& lattice) {
  const Dense d = suffix_tables(lattice);
  const auto e = dense_expected(d);
  BigramTable table;
  for (std::size_t u = 0; u < d.K; ++u) {
    for (std::size_t v = 0; v < d.K; ++v) {
      // Cancellation in q - P can leave tiny negatives.
      table.add(static_cast<int>(u), static_cast<int>(v), std::max(0.0, e[u * d.K + v]));
    }
  }
  return table;
}

double nmla_loss_from_tables(const BigramTable& expected,
                             const BigramTable& reference) {
  const double denom = expected.total() + reference.total();
  if (denom <= 0.0) return 0.0;
  double match = 0.0;
  for (const auto& [key, r] : reference.counts()) {
    match += std::min(expected.at(key.first, key.second), r);
  }
  return 1.0 - 2.0 * match / denom;
}

NmlaLossResult nmla_loss_grad(const LogProbLattice& lattice, const UnitSequence& y) {
  validate_units(y, lattice.vocab());
  const Dense d = suffix_tables(lattice);
  const std::size_t T = d.T, K = d.K;
  std::vector<double> e = dense_expected(d);
  for (auto& v : e) v = std::max(0.0, v);
  const BigramTable ref = reference_bigrams(y);

  NmlaLossResult result;
  result.grad = Tensor::matrix(T, K + 1);
  double expected_total = 0.0;
  for (double v : e) expected_total += v;
  const double ref_total = ref.total();
  const double denom = expected_total + ref_total;
  result.expected_total = expected_total;
  if (denom <= 0.0) return result;

  double match = 0.0;
  for (const auto& [key, r] : ref.counts()) {
    match += std::min(e[static_cast<std::size_t>(key.first) * K + static_cast<std::size_t>(key.second)], r);
  }
  result.match = match;
  result.loss = 1.0 - 2.0 * match / denom;

  // dL/dE(g): every pair feeds the denominator; reference pairs whose
  // expected count sits strictly below the reference also feed the match.
  std::vector<double> w(K * K, 2.0 * match / (denom * denom));
  for (const auto& [key, r] : ref.counts()) {
    const std::size_t g = static_cast<std::size_t>(key.first) * K + static_cast<std::size_t>(key.second);
    if (e[g] < r) w[g] -= 2.0 / denom;
  }

  // Reverse pass through E(u,v) = sum_t P_t(u) (q_t(v) - [u=v] P_{t+1}(v)).
  std::vector<double> dp(T * (K + 1), 0.0);
  std::vector<double> qbar_prev(K, 0.0), qbar(K, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t v = 0; v < K; ++v) qbar[v] = 0.0;
    for (std::size_t u = 0; u < K; ++u) {
      const double pu = d.P(t, u);
      double acc = 0.0;
      for (std::size_t v = 0; v < K; ++v) {
        const double wuv = w[u * K + v];
        double r = d.q[t * K + v];
        if (u == v) r -= d.P(t + 1, v);
        acc += wuv * r;
        qbar[v] += wuv * pu;
      }
      dp[t * (K + 1) + u] += acc;
      if (t + 1 < T) dp[(t + 1) * (K + 1) + u] -= w[u * K + u] * pu;
    }
    if (t >= 1) {
      // q_{t-1} = P_t + P_t(blank) q_t.
      const double blank = d.P(t, K);
      double blank_grad = 0.0;
      for (std::size_t v = 0; v < K; ++v) {
        dp[t * (K + 1) + v] += qbar_prev[v];
        blank_grad += qbar_prev[v] * d.q[t * K + v];
        qbar[v] += blank * qbar_prev[v];
      }
      dp[t * (K + 1) + K] += blank_grad;
    }
    std::swap(qbar, qbar_prev);
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t v = 0; v <= K; ++v) {
      result.grad(t, v) = dp[t * (K + 1) + v] * d.P(t, v);
    }
  }
  return result;
}

}  // namespace s2ut

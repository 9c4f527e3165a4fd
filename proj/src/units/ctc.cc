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

#include "s2ut/ctc.h"

#include <algorithm>
#include <string>
#include <vector>

#include "s2ut/error.h"

namespace s2ut {
namespace {

// Expanded label sequence: blank y1 blank y2 ... yM blank.
std::vector<int> expand(const UnitSequence& y, int blank) {
  std::vector<int> labels(2 * y.size() + 1, blank);
  for (std::size_t i = 0; i < y.size(); ++i) labels[2 * i + 1] = y[i];
  return labels;
}

// State s may be entered from s - 2 when it is a unit distinct from the
// unit two states back.
bool can_skip(const std::vector<int>& labels, std::size_t s, int blank) {
  return s >= 2 && labels[s] != blank && labels[s] != labels[s - 2];
}

void check_targets(const LogProbLattice& lattice, const UnitSequence& y) {
  validate_units(y, lattice.vocab());
}

// alpha(t, s) in log space, row-major (T x S).
std::vector<double> forward(const LogProbLattice& lat, const std::vector<int>& labels) {
  const std::size_t T = lat.length(), S = labels.size();
  const int blank = lat.blank();
  std::vector<double> alpha(T * S, kLogZero);
  alpha[0] = lat.logp(0, labels[0]);
  if (S > 1) alpha[1] = lat.logp(0, labels[1]);
  for (std::size_t t = 1; t < T; ++t) {
    const double* prev = &alpha[(t - 1) * S];
    double* cur = &alpha[t * S];
    for (std::size_t s = 0; s < S; ++s) {
      double acc = prev[s];
      if (s >= 1) acc = log_add(acc, prev[s - 1]);
      if (can_skip(labels, s, blank)) acc = log_add(acc, prev[s - 2]);
      cur[s] = is_log_zero(acc) ? kLogZero : acc + lat.logp(t, labels[s]);
    }
  }
  return alpha;
}

double total_from_alpha(const std::vector<double>& alpha, std::size_t T, std::size_t S) {
  double total = alpha[(T - 1) * S + S - 1];
  if (S > 1) total = log_add(total, alpha[(T - 1) * S + S - 2]);
  return total;
}

}  // namespace

LogProbLattice::LogProbLattice(Tensor log_probs) : log_probs_(std::move(log_probs)) {
  if (log_probs_.rank() != 2 || log_probs_.rows() == 0 || log_probs_.cols() < 2) {
    throw LatticeError("lattice must be T x (K+1) with T >= 1 and K >= 1, got " +
                       log_probs_.shape_str());
  }
  for (std::size_t t = 0; t < log_probs_.rows(); ++t) {
    double lse = kLogZero;
    for (double v : log_probs_.row(t)) {
      if (std::isnan(v) || v > kTolerance) {
        throw LatticeError("lattice row " + std::to_string(t) +
                           " holds an invalid log-probability");
      }
      lse = log_add(lse, v);
    }
    if (std::abs(lse) > kTolerance) {
      throw LatticeError("lattice row " + std::to_string(t) +
                         " is not normalized (logsumexp = " + std::to_string(lse) +
                         ")");
    }
  }
}

LogProbLattice LogProbLattice::from_probs(const Tensor& probs) {
  Tensor lp = probs;
  for (auto& v : lp.data()) v = v > 0.0 ? std::log(v) : kLogZero;
  return LogProbLattice(std::move(lp));
}

LogProbLattice LogProbLattice::from_scores(const Tensor& scores) {
  if (scores.rank() != 2) {
    throw LatticeError("scores must be a matrix, got " + scores.shape_str());
  }
  Tensor lp = scores;
  for (std::size_t t = 0; t < lp.rows(); ++t) {
    auto row = lp.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    for (auto& v : row) v -= lse;
  }
  return LogProbLattice(std::move(lp));
}

double ctc_log_likelihood(const LogProbLattice& lattice, const UnitSequence& y) {
  check_targets(lattice, y);
  if (lattice.length() < min_alignment_length(y)) return kLogZero;
  const auto labels = expand(y, lattice.blank());
  const auto alpha = forward(lattice, labels);
  return total_from_alpha(alpha, lattice.length(), labels.size());
}

CtcLossResult ctc_loss_grad(const LogProbLattice& lattice, const UnitSequence& y) {
  check_targets(lattice, y);
  const std::size_t T = lattice.length();
  if (T < min_alignment_length(y)) {
    throw InfeasibleAlignment(T, min_alignment_length(y));
  }
  const int blank = lattice.blank();
  const auto labels = expand(y, blank);
  const std::size_t S = labels.size();
  const auto alpha = forward(lattice, labels);
  const double log_total = total_from_alpha(alpha, T, S);

  // beta(t, s): log-probability of the remaining emissions after t,
  // given state s at t.
  std::vector<double> beta(T * S, kLogZero);
  beta[(T - 1) * S + S - 1] = 0.0;
  if (S > 1) beta[(T - 1) * S + S - 2] = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    const double* next = &beta[(t + 1) * S];
    double* cur = &beta[t * S];
    for (std::size_t s = 0; s < S; ++s) {
      double acc = next[s] + lattice.logp(t + 1, labels[s]);
      if (s + 1 < S) acc = log_add(acc, next[s + 1] + lattice.logp(t + 1, labels[s + 1]));
      if (s + 2 < S && can_skip(labels, s + 2, blank)) {
        acc = log_add(acc, next[s + 2] + lattice.logp(t + 1, labels[s + 2]));
      }
      cur[s] = acc;
    }
  }

  CtcLossResult result;
  result.loss = -log_total;
  result.grad = Tensor::matrix(T, lattice.width());
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double a = alpha[t * S + s], b = beta[t * S + s];
      if (is_log_zero(a) || is_log_zero(b)) continue;
      result.grad(t, static_cast<std::size_t>(labels[s])) -= std::exp(a + b - log_total);
    }
  }
  return result;
}

Alignment viterbi_alignment(const LogProbLattice& lattice, const UnitSequence& y) {
  check_targets(lattice, y);
  const std::size_t T = lattice.length();
  if (T < min_alignment_length(y)) {
    throw InfeasibleAlignment(T, min_alignment_length(y));
  }
  const int blank = lattice.blank();
  const auto labels = expand(y, blank);
  const std::size_t S = labels.size();
  std::vector<double> score(T * S, kLogZero);
  std::vector<std::size_t> from(T * S, 0);
  score[0] = lattice.logp(0, labels[0]);
  if (S > 1) score[1] = lattice.logp(0, labels[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      // Candidates in increasing state order; strict > keeps the smallest.
      std::size_t best_state = s;
      double best = kLogZero;
      auto consider = [&](std::size_t p) {
        const double v = score[(t - 1) * S + p];
        if (!is_log_zero(v) && (is_log_zero(best) || v > best)) {
          best = v;
          best_state = p;
        }
      };
      if (can_skip(labels, s, blank)) consider(s - 2);
      if (s >= 1) consider(s - 1);
      consider(s);
      if (is_log_zero(best)) continue;
      score[t * S + s] = best + lattice.logp(t, labels[s]);
      from[t * S + s] = best_state;
    }
  }
  std::size_t state = S - 1;
  if (S > 1) {
    const double last_unit = score[(T - 1) * S + S - 2];
    const double last_blank = score[(T - 1) * S + S - 1];
    if (!is_log_zero(last_unit) && (is_log_zero(last_blank) || last_unit >= last_blank)) {
      state = S - 2;
    }
  }
  Alignment a;
  a.tokens.assign(T, blank);
  for (std::size_t t = T; t-- > 0;) {
    a.tokens[t] = labels[state];
    if (t > 0) state = from[t * S + state];
  }
  return a;
}

Alignment argmax_alignment(const LogProbLattice& lattice) {
  Alignment a;
  a.tokens.resize(lattice.length());
  for (std::size_t t = 0; t < lattice.length(); ++t) {
    auto row = lattice.log_probs().row(t);
    a.tokens[t] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return a;
}

UnitSequence greedy_decode(const LogProbLattice& lattice) {
  return collapse(argmax_alignment(lattice), lattice.vocab());
}

}  // namespace s2ut

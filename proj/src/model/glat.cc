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

#include "s2ut/glat.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "s2ut/error.h"
#include "s2ut/ops.h"

namespace s2ut {

void GlancingSchedule::validate() const {
  if (!(0.0 <= end_ratio && end_ratio <= start_ratio && start_ratio <= 1.0)) {
    throw ConfigError("glancing ratios need 0 <= end_ratio <= start_ratio <= 1");
  }
}

double ratio_at(std::size_t step, const GlancingSchedule& sched) {
  if (sched.decay_steps == 0 || step >= sched.decay_steps) return sched.end_ratio;
  const double frac = double(step) / double(sched.decay_steps);
  return sched.start_ratio + (sched.end_ratio - sched.start_ratio) * frac;
}

std::vector<std::size_t> glance_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

GlancePlan plan_glance(const LogProbLattice& first_pass, const UnitSequence& y,
                       double ratio, std::uint64_t seed, const GlanceOptions& opts) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw RangeError("glancing ratio " + std::to_string(ratio) + " outside [0, 1]");
  }
  GlancePlan plan;
  plan.best = viterbi_alignment(first_pass, y);
  const Alignment guess = argmax_alignment(first_pass);
  const std::size_t t_len = first_pass.length();

  std::vector<std::size_t> mismatched;
  for (std::size_t t = 0; t < t_len; ++t) {
    if (guess.tokens[t] != plan.best.tokens[t]) mismatched.push_back(t);
  }
  if (opts.distance == GlanceDistance::kGreedy) {
    plan.distance = double(mismatched.size());
  } else {
    for (std::size_t t = 0; t < t_len; ++t) {
      plan.distance += 1.0 - first_pass.prob(t, plan.best.tokens[t]);
    }
  }
  // Guard against ceil turning 2.0000000001 into 3.
  const double raw = ratio * plan.distance;
  std::size_t n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  if (raw <= 0.0) n = 0;

  std::vector<std::size_t> order = glance_order(t_len, seed);
  if (opts.positions == GlancePositions::kMismatched) {
    std::vector<std::size_t> filtered;
    for (std::size_t t : order) {
      if (guess.tokens[t] != plan.best.tokens[t]) filtered.push_back(t);
    }
    order = std::move(filtered);
  }
  n = std::min(n, order.size());
  plan.positions.assign(order.begin(), order.begin() + n);
  for (std::size_t t : plan.positions) plan.tokens.push_back(plan.best.tokens[t]);
  return plan;
}

Var apply_glance(const Var& e, const Var& embeddings, const GlancePlan& plan) {
  if (plan.positions.empty()) return e;
  return replace_rows(e, embeddings, plan.positions, plan.tokens);
}

GlanceResult glance(const Tensor& e, const LogProbLattice& first_pass,
                    const UnitSequence& y, double ratio, std::uint64_t seed,
                    const Tensor& embeddings, const GlanceOptions& opts) {
  if (e.rows() != first_pass.length()) {
    throw ShapeError("decoder input has " + std::to_string(e.rows()) +
                     " rows, lattice has " + std::to_string(first_pass.length()));
  }
  const GlancePlan plan = plan_glance(first_pass, y, ratio, seed, opts);
  NoGradGuard no_grad;
  GlanceResult r;
  r.input = apply_glance(constant(e), constant(embeddings), plan)->value;
  r.n_replaced = plan.n_replaced();
  return r;
}

}  // namespace s2ut

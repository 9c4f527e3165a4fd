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

#include "s2ut/trainer.h"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "s2ut/eval.h"
#include "s2ut/io.h"
#include "s2ut/nmla.h"
#include "s2ut/synth.h"

namespace s2ut {

const char* to_string(Stage s) {
  switch (s) {
    case Stage::kAr:
      return "ar";
    case Stage::kNarStage1:
      return "nar1";
    case Stage::kNarStage2:
      return "nar2";
  }
  return "?";
}

void TrainConfig::validate() const {
  for (const StageSchedule* s : {&ar, &stage1, &stage2}) {
    if (!(s->peak_lr > 0.0)) throw ConfigError("peak learning rate must be positive");
    if (s->batch_frames == 0) throw ConfigError("batch_frames must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (!(stage2_ratio >= 0.0 && stage2_ratio <= 1.0)) {
    throw ConfigError("stage2_ratio must be in [0, 1]");
  }
  if (!(divergence_factor > 1.0)) throw ConfigError("divergence_factor must exceed 1");
  glancing_schedule.validate();
}

const StageSchedule& TrainConfig::schedule(Stage s) const {
  switch (s) {
    case Stage::kAr:
      return ar;
    case Stage::kNarStage1:
      return stage1;
    case Stage::kNarStage2:
      return stage2;
  }
  return ar;
}

double learning_rate(std::size_t step, double peak, std::size_t warmup) {
  if (step == 0) return 0.0;
  if (warmup == 0) return peak;
  if (step <= warmup) return peak * double(step) / double(warmup);
  return peak * std::sqrt(double(warmup) / double(step));
}

Adam::Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::vector<Parameter>& params, double lr) {
  if (m_.empty()) {
    for (const Parameter& p : params) {
      m_.emplace_back(p.value().shape());
      v_.emplace_back(p.value().shape());
    }
  }
  if (m_.size() != params.size()) throw ConfigError("optimizer parameter set changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = params[k].value();
    const Tensor& g = params[k].gradient();
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

double clip_gradients(std::vector<Parameter>& params, double max_norm) {
  double sq = 0.0;
  for (Parameter& p : params) {
    for (double g : p.gradient().data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter& p : params) {
      for (double& g : p.gradient().data()) g *= s;
    }
  }
  return norm;
}

std::string format_metrics(const StepMetrics& m) {
  std::ostringstream os;
  os.precision(8);
  os << m.step << '\t' << to_string(m.stage) << '\t' << m.loss << '\t' << m.lr;
  if (m.stage != Stage::kAr) os << '\t' << m.glance_ratio << '\t' << m.n_replaced_mean;
  return os.str();
}

namespace {

// Index stream over shuffled epochs, cut into batches by source frames.
class Batcher {
 public:
  Batcher(const Dataset& data, std::size_t batch_frames, std::uint64_t seed)
      : data_(data), batch_frames_(batch_frames), rng_(seed), order_(data.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    cursor_ = order_.size();
  }

  std::vector<std::size_t> next() {
    std::vector<std::size_t> batch;
    std::size_t frames = 0;
    while (batch.empty() || frames < batch_frames_) {
      if (cursor_ == order_.size()) {
        if (!batch.empty()) break;  // keep epochs whole
        std::shuffle(order_.begin(), order_.end(), rng_);
        cursor_ = 0;
        ++epoch_;
      }
      const std::size_t i = order_[cursor_++];
      batch.push_back(i);
      frames += data_.features[i].length();
    }
    return batch;
  }

  std::size_t epoch() const { return epoch_; }

 private:
  const Dataset& data_;
  std::size_t batch_frames_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
  std::size_t epoch_ = 0;
};

Var accumulate(const Var& total, const Var& piece) { return total ? add(total, piece) : piece; }

}  // namespace

TrainResult train(Stage stage, const TrainConfig& cfg, const Dataset& data, S2utModel& model,
                  const std::string& metrics_path, const Dataset* valid) {
  cfg.validate();
  auto* ar = dynamic_cast<ArModel*>(&model);
  auto* nar = dynamic_cast<NarModel*>(&model);
  if (stage == Stage::kAr && ar == nullptr) throw ConfigError("ar stage needs an ar model");
  if (stage != Stage::kAr && nar == nullptr) throw ConfigError("nar stages need a nar model");
  const ModelConfig& mc = model.config();
  data.validate(mc.feature_dim, mc.num_units);
  if (data.size() == 0) throw ConfigError("training set is empty");

  const StageSchedule& sched = cfg.schedule(stage);
  const std::uint64_t stage_seed = derive_seed(cfg.seed, 7000 + std::uint64_t(stage));
  Batcher batcher(data, sched.batch_frames, derive_seed(stage_seed, 1));
  std::mt19937_64 dropout_rng(derive_seed(stage_seed, 2));
  Adam opt(cfg.beta1, cfg.beta2, cfg.adam_eps);
  auto& params = model.parameters().all();

  TrainResult result;
  std::string log;
  double first_epoch_sum = 0.0;
  std::size_t first_epoch_count = 0;
  auto flush_log = [&] {
    if (!metrics_path.empty()) write_file_atomic(metrics_path, log);
  };
  // NaN weights surface here first, before any loss is formed.
  auto require_numbers = [&](const Tensor& lp, std::size_t step) {
    for (double v : lp.data()) {
      if (std::isnan(v)) {
        flush_log();
        throw TrainingDiverged(std::string(to_string(stage)) +
                               " decoder produced NaN at step " + std::to_string(step));
      }
    }
  };

  for (std::size_t step = 1; step <= sched.steps; ++step) {
    const std::vector<std::size_t> batch = batcher.next();
    const bool in_first_epoch = batcher.epoch() <= 1;
    model.parameters().zero_grad();
    ForwardContext ctx{true, &dropout_rng};
    double ratio = 0.0;
    if (stage != Stage::kAr && cfg.glancing) {
      ratio = stage == Stage::kNarStage1 ? ratio_at(step - 1, cfg.glancing_schedule)
                                         : cfg.stage2_ratio;
    }
    const std::uint64_t glance_base = derive_seed(stage_seed, 100000 + step);

    Var total;
    double denom = 0.0;
    std::size_t replaced = 0, glanced = 0;
    for (std::size_t i : batch) {
      const UnitSequence& y = data.units[i];
      Var h = model.encode(data.features[i], ctx);
      if (stage == Stage::kAr) {
        total = accumulate(total, ar->sequence_nll(y, h, ctx));
        denom += double(y.units.size() + 1);
        continue;
      }
      Var e = nar->decoder_input(h);
      if (min_alignment_length(y) > e->value.rows()) {
        ++result.infeasible_skipped;
        continue;
      }
      if (ratio > 0.0) {
        GlancePlan plan;
        {
          NoGradGuard no_grad;
          Var first_lp = nar->decode_log_probs(e, h, ctx);
          require_numbers(first_lp->value, step);
          const LogProbLattice first(first_lp->value);
          plan = plan_glance(first, y, ratio, glance_seed(glance_base, i), cfg.glance_options);
        }
        e = apply_glance(e, nar->token_embeddings(), plan);
        replaced += plan.n_replaced();
        ++glanced;
      }
      Var lp = nar->decode_log_probs(e, h, ctx);
      require_numbers(lp->value, step);
      const LogProbLattice lattice(lp->value);
      const std::size_t m = y.units.size();
      if (stage == Stage::kNarStage2 && m >= 2) {
        auto r = nmla_loss_grad(lattice, y);
        total = accumulate(total, scalar_with_gradient(lp, r.loss, std::move(r.grad)));
        denom += 1.0;
      } else {
        auto r = ctc_loss_grad(lattice, y);
        Var piece = scalar_with_gradient(lp, r.loss, std::move(r.grad));
        if (stage == Stage::kNarStage2) {
          ++result.ctc_fallback;
          piece = scale(piece, 1.0 / double(std::max<std::size_t>(m, 1)));
          denom += 1.0;
        } else {
          denom += double(std::max<std::size_t>(m, 1));
        }
        total = accumulate(total, piece);
      }
    }
    if (!total) continue;  // every sample in the batch was infeasible

    Var loss = scale(total, 1.0 / denom);
    const double value = loss->value[0];
    if (!std::isfinite(value)) {
      flush_log();
      throw TrainingDiverged(std::string(to_string(stage)) + " loss is not finite at step " +
                             std::to_string(step));
    }
    if (in_first_epoch) {
      first_epoch_sum += value;
      ++first_epoch_count;
    } else if (first_epoch_count > 0 &&
               value > cfg.divergence_factor * first_epoch_sum / double(first_epoch_count)) {
      flush_log();
      throw TrainingDiverged(std::string(to_string(stage)) + " loss " + std::to_string(value) +
                             " at step " + std::to_string(step) + " exceeds " +
                             std::to_string(cfg.divergence_factor) +
                             "x the first-epoch mean");
    }
    backward(loss);
    clip_gradients(params, cfg.clip_norm);
    const double lr = learning_rate(step, sched.peak_lr, sched.warmup);
    opt.step(params, lr);

    StepMetrics m{step, stage, value, lr, ratio,
                  glanced ? double(replaced) / double(glanced) : 0.0};
    result.steps.push_back(m);
    log += format_metrics(m) + '\n';

    if (valid && cfg.valid_every > 0 && step % cfg.valid_every == 0) {
      result.valid_bleu.emplace_back(step, evaluate(model, *valid, cfg.valid_samples).bleu);
    }
  }
  flush_log();
  return result;
}

}  // namespace s2ut

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

#ifndef S2UT_TRAINER_H_
#define S2UT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "s2ut/dataset.h"
#include "s2ut/error.h"
#include "s2ut/glat.h"
#include "s2ut/model.h"

namespace s2ut {

enum class Stage { kAr, kNarStage1, kNarStage2 };

const char* to_string(Stage s);

struct StageSchedule {
  std::size_t steps = 0;
  double peak_lr = 1e-3;
  std::size_t warmup = 800;
  std::size_t batch_frames = 8000;
};

struct TrainConfig {
  StageSchedule ar{8000, 1e-3, 800, 8000};
  StageSchedule stage1{8000, 1e-3, 800, 8000};
  StageSchedule stage2{1000, 3e-4, 100, 8000};
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;  // global gradient norm, 0 disables
  std::uint64_t seed = 1;

  bool glancing = true;
  GlancingSchedule glancing_schedule{0.5, 0.3, 4000};
  double stage2_ratio = 0.3;
  GlanceOptions glance_options;

  std::size_t valid_every = 0;  // steps between validation BLEU, 0 disables
  std::size_t valid_samples = 100;
  double divergence_factor = 10.0;

  void validate() const;
  const StageSchedule& schedule(Stage s) const;
};

// Linear warmup to the peak, then inverse square root decay. Steps count
// from 1.
double learning_rate(std::size_t step, double peak, std::size_t warmup);

class Adam {
 public:
  Adam(double beta1, double beta2, double eps);
  void step(std::vector<Parameter>& params, double lr);

 private:
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Scales all gradients so their joint L2 norm is at most max_norm; returns
// the norm before clipping.
double clip_gradients(std::vector<Parameter>& params, double max_norm);

struct StepMetrics {
  std::size_t step = 0;
  Stage stage = Stage::kAr;
  double loss = 0.0;
  double lr = 0.0;
  double glance_ratio = 0.0;
  double n_replaced_mean = 0.0;
};

struct TrainResult {
  std::vector<StepMetrics> steps;
  std::vector<std::pair<std::size_t, double>> valid_bleu;
  std::size_t infeasible_skipped = 0;  // samples dropped from the CTC loss
  std::size_t glance_skipped = 0;
  std::size_t ctc_fallback = 0;        // stage-2 samples too short for NMLA
};

// Thrown by the divergence guard.
class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(const std::string& what) : Error("E_DIVERGED", what) {}
};

// Runs one stage on the model in place. The metrics log (if a path is
// given) gets one tab-separated line per step; the AR stage omits the
// glancing columns. Checkpointing is left to the caller.
TrainResult train(Stage stage, const TrainConfig& cfg, const Dataset& data, S2utModel& model,
                  const std::string& metrics_path = "", const Dataset* valid = nullptr);

std::string format_metrics(const StepMetrics& m);

}  // namespace s2ut

#endif  // S2UT_TRAINER_H_

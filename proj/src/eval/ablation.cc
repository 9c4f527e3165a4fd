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

#include "s2ut/ablation.h"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "s2ut/distill.h"
#include "s2ut/error.h"
#include "s2ut/eval.h"
#include "s2ut/io.h"
#include "s2ut/trainer.h"

namespace s2ut {

namespace fs = std::filesystem;

const AblationRow& AblationOutcome::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw RangeError("no ablation row named " + name);
}

AblationOutcome run_ablation(const ExperimentConfig& cfg, const Dataset& train_set,
                             const Dataset& test, std::uint64_t seed,
                             const std::string& out_dir, const ProgressFn& progress) {
  auto note = [&](const std::string& msg) {
    if (progress) progress("seed " + std::to_string(seed) + ": " + msg);
  };
  auto path = [&](const std::string& name) {
    return out_dir.empty() ? std::string() : (fs::path(out_dir) / name).string();
  };
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  ModelConfig ar_cfg = cfg.model;
  ar_cfg.variant = ModelVariant::kAr;
  ModelConfig nar_cfg = cfg.model;
  nar_cfg.variant = ModelVariant::kNar;
  const std::uint64_t ar_init = derive_seed(seed, 1);
  const std::uint64_t nar_init = derive_seed(seed, 2);

  AblationOutcome out;
  out.seed = seed;

  ArModel ar(ar_cfg, ar_init);
  note("training ar baseline");
  train(Stage::kAr, tc, train_set, ar, path("ar.metrics.tsv"));
  if (!out_dir.empty()) save_checkpoint(ar, path("ar.ckpt"));
  out.ar_bleu = evaluate(ar, test, cfg.eval_limit).bleu;
  note("ar unit-bleu " + std::to_string(out.ar_bleu));

  note("distilling training targets");
  const DistillResult kd = distill(ar, train_set);
  if (!out_dir.empty()) write_units(path("train.distilled.units"), kd.data.units);

  struct Variant {
    std::string name;
    bool pretrain, glat, kd;
  };
  const Variant variants[] = {{"no-pretrain", false, true, true},
                              {"no-glat", true, false, true},
                              {"no-kd", true, true, false},
                              {"full-stage1", true, true, true}};
  NarModel full(nar_cfg, nar_init);
  for (const Variant& v : variants) {
    const bool is_full = v.name == "full-stage1";
    NarModel scratch(nar_cfg, nar_init);
    NarModel& m = is_full ? full : scratch;
    if (v.pretrain) transfer_encoder(ar, m);
    TrainConfig vc = tc;
    vc.glancing = v.glat;
    note("training " + v.name);
    train(Stage::kNarStage1, vc, v.kd ? kd.data : train_set, m, path(v.name + ".metrics.tsv"));
    if (!out_dir.empty()) save_checkpoint(m, path(v.name + ".ckpt"));
    const double bleu = evaluate(m, test, cfg.eval_limit).bleu;
    note(v.name + " unit-bleu " + std::to_string(bleu));
    out.rows.push_back({v.name, v.pretrain, v.glat, v.kd, false, bleu});
  }

  note("fine-tuning full-stage1 with nmla");
  train(Stage::kNarStage2, tc, kd.data, full, path("full-nmla.metrics.tsv"));
  if (!out_dir.empty()) save_checkpoint(full, path("full-nmla.ckpt"));
  const double bleu = evaluate(full, test, cfg.eval_limit).bleu;
  note("full+nmla unit-bleu " + std::to_string(bleu));
  out.rows.push_back({"full+nmla", true, true, true, true, bleu});

  if (!out_dir.empty()) {
    write_file_atomic(path("ablation.txt"), ablation_table(out));
    write_file_atomic(path("ablation.tsv"), ablation_tsv(out));
  }
  return out;
}

std::string ablation_table(const AblationOutcome& outcome) {
  std::ostringstream os;
  auto mark = [](bool b) { return b ? "yes" : "no "; };
  os << "seed " << outcome.seed << "\n";
  os << "Pretrain  GLAT  KD   NMLA  unit-BLEU\n";
  for (const auto& r : outcome.rows) {
    char line[96];
    std::snprintf(line, sizeof line, "%-9s %-5s %-4s %-5s %.4f\n", mark(r.pretrain),
                  mark(r.glat), mark(r.kd), mark(r.nmla), r.bleu);
    os << line;
  }
  char ar[64];
  std::snprintf(ar, sizeof ar, "ar baseline unit-BLEU %.4f\n", outcome.ar_bleu);
  os << ar;
  return os.str();
}

std::string ablation_tsv(const AblationOutcome& outcome) {
  std::ostringstream os;
  os.precision(6);
  os << "name\tpretrain\tglat\tkd\tnmla\tunit_bleu\n";
  for (const auto& r : outcome.rows) {
    os << r.name << '\t' << r.pretrain << '\t' << r.glat << '\t' << r.kd << '\t' << r.nmla
       << '\t' << r.bleu << '\n';
  }
  os << "ar-baseline\t\t\t\t\t" << outcome.ar_bleu << '\n';
  return os.str();
}

}  // namespace s2ut

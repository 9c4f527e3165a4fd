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

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "s2ut/ablation.h"
#include "s2ut/bench.h"
#include "s2ut/config.h"
#include "s2ut/distill.h"
#include "s2ut/error.h"
#include "s2ut/eval.h"
#include "s2ut/io.h"
#include "s2ut/synth.h"
#include "s2ut/trainer.h"

namespace fs = std::filesystem;
using namespace s2ut;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string data;
  std::string ckpt;
  std::string nar_ckpt;
  std::string hyp;
  std::string split = "test";
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    if (!fs::exists(o.config)) throw IoError("missing config file " + o.config);
    cfg = load_config(o.config);
  } else {
    cfg.finalize();
  }
  return cfg;
}

std::string out_path(const Options& o, const std::string& name) {
  return (fs::path(o.out) / name).string();
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is required");
  if (!fs::exists(path)) throw IoError("missing " + what + " " + path);
}

void require_data(const Options& o) {
  if (o.data.empty()) throw ConfigError("--data is required");
  require_file((fs::path(o.data) / "manifest.tsv").string(), "manifest");
}

ModelConfig model_config(const ExperimentConfig& cfg, ModelVariant v) {
  ModelConfig m = cfg.model;
  m.variant = v;
  return m;
}

std::uint64_t seed_of(const Options& o, std::uint64_t fallback) {
  return o.seed ? *o.seed : fallback;
}

void log_line(const std::string& msg) { std::cerr << msg << "\n"; }

void cmd_gen_data(const Options& o) {
  ExperimentConfig cfg = load(o);
  if (o.seed) cfg.data.seed = *o.seed;
  const SynthData data = generate_dataset(cfg.data);
  write_dataset(data, cfg.data, o.out);
  for (const auto& w : data.warnings) log_line(w);
  std::cout << "wrote " << data.train.size() << "/" << data.valid.size() << "/"
            << data.test.size() << " train/valid/test samples to " << o.out << "\n"
            << "mean frames per phone " << data.mean_frames_per_phone
            << ", ctc-infeasible fraction " << data.infeasible_fraction << "\n";
  std::cout << "upsample sweep (train):";
  for (int lambda = 1; lambda <= 8; ++lambda) {
    std::cout << " " << lambda << ":" << infeasible_fraction(data.train, lambda);
  }
  std::cout << "\n";
}

void cmd_train_ar(const Options& o) {
  ExperimentConfig cfg = load(o);
  require_data(o);
  cfg.train.seed = seed_of(o, cfg.train.seed);
  const Dataset train_set = load_split(o.data, "train");
  const Dataset valid = load_split(o.data, "valid");
  ArModel model(model_config(cfg, ModelVariant::kAr), derive_seed(cfg.train.seed, 1));
  const TrainResult r =
      train(Stage::kAr, cfg.train, train_set, model, out_path(o, "ar.metrics.tsv"), &valid);
  save_checkpoint(model, out_path(o, "ar.ckpt"));
  std::cout << "ar: " << r.steps.size() << " steps, final loss "
            << (r.steps.empty() ? 0.0 : r.steps.back().loss) << ", checkpoint "
            << out_path(o, "ar.ckpt") << "\n";
}

void cmd_distill(const Options& o) {
  ExperimentConfig cfg = load(o);
  require_data(o);
  require_file(o.ckpt, "teacher checkpoint");
  ArModel teacher(model_config(cfg, ModelVariant::kAr));
  load_checkpoint(teacher, o.ckpt);
  const Dataset train_set = load_split(o.data, "train");
  const DistillResult r = distill(teacher, train_set);
  write_units(out_path(o, "train.units"), r.data.units);
  // The distilled manifest reuses the source feature files in place.
  std::vector<ManifestEntry> manifest;
  for (ManifestEntry e : read_manifest((fs::path(o.data) / "manifest.tsv").string())) {
    e.features = fs::absolute(fs::path(o.data) / e.features).string();
    if (e.split == "train") {
      e.units = "train.units";
    } else {
      e.units = fs::absolute(fs::path(o.data) / e.units).string();
    }
    manifest.push_back(e);
  }
  write_manifest(out_path(o, "manifest.tsv"), manifest);
  if (r.kept_original) {
    log_line(std::to_string(r.kept_original) + " empty teacher outputs kept the reference");
  }
  std::cout << "distilled " << r.data.size() << " targets into " << out_path(o, "train.units")
            << " (" << r.kept_original << " kept original, " << r.truncated
            << " truncated)\n";
}

void cmd_train_nar(const Options& o) {
  ExperimentConfig cfg = load(o);
  require_data(o);
  cfg.train.seed = seed_of(o, cfg.train.seed);
  NarModel model(model_config(cfg, ModelVariant::kNar), derive_seed(cfg.train.seed, 2));
  if (!o.ckpt.empty()) {
    require_file(o.ckpt, "pretrained ar checkpoint");
    ArModel ar(model_config(cfg, ModelVariant::kAr));
    load_checkpoint(ar, o.ckpt);
    transfer_encoder(ar, model);
  }
  const Dataset train_set = load_split(o.data, "train");
  const Dataset valid = load_split(o.data, "valid");
  const TrainResult r = train(Stage::kNarStage1, cfg.train, train_set, model,
                              out_path(o, "nar1.metrics.tsv"), &valid);
  save_checkpoint(model, out_path(o, "nar1.ckpt"));
  std::cout << "nar stage 1: " << r.steps.size() << " steps, " << r.infeasible_skipped
            << " infeasible samples skipped, checkpoint " << out_path(o, "nar1.ckpt") << "\n";
}

void cmd_finetune(const Options& o) {
  ExperimentConfig cfg = load(o);
  require_data(o);
  require_file(o.ckpt, "stage-1 checkpoint");
  cfg.train.seed = seed_of(o, cfg.train.seed);
  NarModel model(model_config(cfg, ModelVariant::kNar));
  load_checkpoint(model, o.ckpt);
  const Dataset train_set = load_split(o.data, "train");
  const Dataset valid = load_split(o.data, "valid");
  const TrainResult r = train(Stage::kNarStage2, cfg.train, train_set, model,
                              out_path(o, "nar2.metrics.tsv"), &valid);
  save_checkpoint(model, out_path(o, "nar2.ckpt"));
  std::cout << "nar stage 2: " << r.steps.size() << " steps, " << r.ctc_fallback
            << " short samples used ctc, checkpoint " << out_path(o, "nar2.ckpt") << "\n";
}

void cmd_eval(const Options& o) {
  require_data(o);
  const Dataset data = load_split(o.data, o.split);
  double bleu = 0.0;
  if (!o.hyp.empty()) {
    require_file(o.hyp, "hypothesis file");
    bleu = unit_bleu(read_units(o.hyp), data.units);
  } else {
    require_file(o.ckpt, "checkpoint");
    ExperimentConfig cfg = load(o);
    const ModelConfig stored = read_checkpoint_config(o.ckpt);
    std::unique_ptr<S2utModel> model;
    if (stored.variant == ModelVariant::kAr) {
      model = std::make_unique<ArModel>(model_config(cfg, ModelVariant::kAr));
    } else {
      model = std::make_unique<NarModel>(model_config(cfg, ModelVariant::kNar));
    }
    load_checkpoint(*model, o.ckpt);
    const EvalResult r = evaluate(*model, data, cfg.eval_limit);
    write_units(out_path(o, o.split + ".hyp.units"), r.hyps);
    bleu = r.bleu;
  }
  std::cout << "unit-BLEU " << bleu << "\n";
}

void cmd_ablate(const Options& o) {
  ExperimentConfig cfg = load(o);
  require_data(o);
  const Dataset train_set = load_split(o.data, "train");
  const Dataset test = load_split(o.data, "test");
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (o.seed) seeds = {*o.seed};
  for (std::uint64_t s : seeds) {
    const std::string dir = out_path(o, "seed" + std::to_string(s));
    const AblationOutcome r = run_ablation(cfg, train_set, test, s, dir, log_line);
    std::cout << ablation_table(r) << "\n";
  }
}

void cmd_bench(const Options& o) {
  ExperimentConfig cfg = load(o);
  require_data(o);
  require_file(o.ckpt, "ar checkpoint");
  require_file(o.nar_ckpt, "nar checkpoint");
  ArModel ar(model_config(cfg, ModelVariant::kAr));
  load_checkpoint(ar, o.ckpt);
  NarModel nar(model_config(cfg, ModelVariant::kNar));
  load_checkpoint(nar, o.nar_ckpt);
  const Dataset data = load_split(o.data, cfg.bench_split);
  const BenchReport r = bench_latency(ar, nar, data, cfg.bucket_edges, cfg.bench_warmup,
                                      cfg.bench_repeats);
  write_file_atomic(out_path(o, "bench.txt"), r.table());
  write_file_atomic(out_path(o, "bench.tsv"), r.tsv());
  std::cout << r.table();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-autoregressive speech-to-unit translation toolkit"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI config file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--data", o.data, "dataset directory with manifest.tsv");
    sub->add_option("--seed", o.seed, "seed override");
    return sub;
  };
  struct Command {
    const char* name;
    const char* help;
    void (*run)(const Options&);
  };
  const Command commands[] = {
      {"gen-data", "generate the synthetic dataset", cmd_gen_data},
      {"train-ar", "train the autoregressive baseline", cmd_train_ar},
      {"distill", "replace training targets with teacher outputs", cmd_distill},
      {"train-nar", "stage-1 CTC training with glancing", cmd_train_nar},
      {"finetune-nmla", "stage-2 NMLA fine-tuning", cmd_finetune},
      {"eval", "unit-BLEU of a checkpoint or hypothesis file", cmd_eval},
      {"ablate", "five-way training technique ablation", cmd_ablate},
      {"bench", "AR vs NAR decoding latency", cmd_bench},
  };
  void (*selected)(const Options&) = nullptr;
  for (const Command& c : commands) {
    CLI::App* sub = add_common(app.add_subcommand(c.name, c.help));
    const std::string name = c.name;
    if (name != "gen-data" && name != "train-ar") {
      sub->add_option("--ckpt", o.ckpt, "input checkpoint (ar checkpoint for bench)");
    }
    if (name == "bench") sub->add_option("--nar-ckpt", o.nar_ckpt, "nar checkpoint");
    if (name == "eval") {
      sub->add_option("--hyp", o.hyp, "score a units file instead of decoding");
      sub->add_option("--split", o.split, "split to evaluate");
    }
    sub->callback([&selected, run = c.run] { selected = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 2;
  }
  try {
    fs::create_directories(o.out);
    selected(o);
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

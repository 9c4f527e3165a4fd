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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.h"
#include "s2ut/distill.h"
#include "s2ut/error.h"
#include "s2ut/eval.h"
#include "s2ut/io.h"
#include "s2ut/kmeans.h"
#include "s2ut/synth.h"
#include "s2ut/trainer.h"

namespace s2ut {
namespace {

namespace fs = std::filesystem;

std::string temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "s2ut_pipeline_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

SynthTaskSpec small_spec() {
  SynthTaskSpec s;
  s.train_size = 120;
  s.valid_size = 20;
  s.test_size = 20;
  s.max_phones = 8;
  s.upsample = 5;
  return s;
}

ModelConfig micro_model(ModelVariant v) {
  ModelConfig c;
  c.encoder_layers = c.decoder_layers = 1;
  c.d_model = 16;
  c.heads = 2;
  c.ffn_dim = 32;
  c.conv_kernel = 3;
  c.upsample = 5;
  c.num_units = 16;
  c.feature_dim = 8;
  c.max_positions = 128;
  c.dropout = 0.0;
  c.variant = v;
  return c;
}

TrainConfig quick_train(std::size_t steps) {
  TrainConfig t;
  t.ar = {steps, 3e-3, 2, 60};
  t.stage1 = {steps, 3e-3, 2, 60};
  t.stage2 = {steps, 1e-3, 2, 60};
  t.glancing_schedule.decay_steps = steps;
  return t;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Synth, ExpansionTable) {
  const SynthTaskSpec spec = small_spec();
  const auto table = expansion_table(spec);
  ASSERT_EQ(table.size(), std::size_t(spec.alphabet));
  std::set<int> used;
  for (const auto& e : table) {
    EXPECT_GE(e.size(), 1u);
    EXPECT_LE(e.size(), 3u);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) EXPECT_NE(e[i], e[i - 1]);
      used.insert(e[i]);
    }
  }
  EXPECT_EQ(used.size(), std::size_t(spec.num_units));
}

TEST(Synth, NoSwapTargetsFollowPhones) {
  SynthTaskSpec spec = small_spec();
  spec.p_swap = 0.0;
  const SynthData d = generate_dataset(spec);
  std::vector<int> unit_of(spec.num_units);
  for (int u = 0; u < spec.num_units; ++u) {
    unit_of[u] = kmeans_assign(d.prototypes.row(u), d.codebook);
  }
  std::set<int> distinct(unit_of.begin(), unit_of.end());
  EXPECT_EQ(distinct.size(), std::size_t(spec.num_units));
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    const SynthSample s = draw_sample(spec, d.expansion, d.phone_embeddings, d.prototypes, i,
                                      spec.min_phones, spec.max_phones);
    EXPECT_EQ(s.target_phones, s.phones);
    UnitSequence expect;
    for (int ph : s.phones) {
      for (int u : d.expansion[ph]) expect.units.push_back(unit_of[u]);
    }
    EXPECT_EQ(d.train.units[i], expect) << "sample " << i;
    EXPECT_EQ(d.train.features[i].frames, s.source);
  }
}

TEST(Synth, SwapsOnlyReorderAdjacentPhones) {
  SynthTaskSpec spec = small_spec();
  spec.p_swap = 0.5;
  const SynthData d = generate_dataset(spec);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    const SynthSample s = draw_sample(spec, d.expansion, d.phone_embeddings, d.prototypes, i,
                                      spec.min_phones, spec.max_phones);
    auto a = s.phones, b = s.target_phones;
    changed += a != b;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
  EXPECT_GT(changed, 10u);
}

TEST(Synth, SameSeedSameBytes) {
  const SynthTaskSpec spec = small_spec();
  const auto a = temp_dir("gen_a"), b = temp_dir("gen_b");
  write_dataset(generate_dataset(spec), spec, a);
  write_dataset(generate_dataset(spec), spec, b);
  for (const char* f : {"manifest.tsv", "train.feat", "train.units", "test.feat", "valid.units"}) {
    EXPECT_EQ(slurp(a + "/" + f), slurp(b + "/" + f)) << f;
  }
  SynthTaskSpec other = spec;
  other.seed = 2;
  const auto c = temp_dir("gen_c");
  write_dataset(generate_dataset(other), other, c);
  EXPECT_NE(slurp(a + "/train.feat"), slurp(c + "/train.feat"));
}

TEST(Synth, MeanDurationOverTenThousandSamples) {
  const SynthTaskSpec spec;
  const auto table = expansion_table(spec);
  std::mt19937_64 rng(1);
  const Tensor phones = testing::random_tensor({12, 8}, rng);
  const Tensor protos = testing::random_tensor({16, 8}, rng);
  std::size_t frames = 0, count = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const SynthSample s = draw_sample(spec, table, phones, protos, i, spec.min_phones,
                                      spec.max_phones);
    frames += s.source.rows();
    count += s.phones.size();
  }
  const double mean = double(frames) / double(count);
  EXPECT_GE(mean, 2.0);
  EXPECT_LE(mean, 5.0);
  EXPECT_NEAR(mean, 3.5, 0.1);
}

TEST(Synth, SplitsUseDisjointSampleIds) {
  const SynthTaskSpec spec = small_spec();
  const SynthData d = generate_dataset(spec);
  const auto first_valid = draw_sample(spec, d.expansion, d.phone_embeddings, d.prototypes,
                                       spec.train_size, spec.min_phones, spec.max_phones);
  const auto first_test =
      draw_sample(spec, d.expansion, d.phone_embeddings, d.prototypes,
                  spec.train_size + spec.valid_size, spec.min_phones, spec.max_phones);
  EXPECT_EQ(d.valid.features[0].frames, first_valid.source);
  EXPECT_EQ(d.test.features[0].frames, first_test.source);
}

TEST(Synth, FeasibilityCheck) {
  SynthTaskSpec spec = small_spec();
  spec.max_phones = 16;
  spec.train_size = 400;
  const SynthData ok = generate_dataset(spec);
  EXPECT_LT(ok.infeasible_fraction, 0.02);
  EXPECT_TRUE(ok.warnings.empty());
  spec.upsample = 2;
  const SynthData bad = generate_dataset(spec);
  EXPECT_GT(bad.infeasible_fraction, 0.02);
  ASSERT_EQ(bad.warnings.size(), 1u);
}

TEST(Synth, RejectsBadSpec) {
  SynthTaskSpec s = small_spec();
  s.p_swap = 0.6;
  EXPECT_THROW(generate_dataset(s), ConfigError);
  s = small_spec();
  s.alphabet = 2;
  s.max_expansion = 3;
  EXPECT_THROW(generate_dataset(s), ConfigError);  // cannot cover 16 units
}

TEST(KMeans, DistinctPointsBecomeCodebook) {
  const Tensor pts = Tensor::from_rows({{0, 0}, {5, 0}, {0, 5}, {5, 5}});
  const KMeansResult r = kmeans_fit(pts, 4, 10, 3);
  std::set<std::vector<double>> got, want;
  for (std::size_t k = 0; k < 4; ++k) {
    got.insert({r.centroids(k, 0), r.centroids(k, 1)});
    want.insert({pts(k, 0), pts(k, 1)});
  }
  EXPECT_EQ(got, want);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.iterations, 2u);  // second pass sees no change
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(kmeans_assign(r.centroids.row(k), r.centroids), int(k));
}

TEST(KMeans, ObjectiveNonIncreasing) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor pts = testing::random_tensor({300, 3}, rng);
    const KMeansResult r = kmeans_fit(pts, 7, 50, trial);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] + 1e-9);
    EXPECT_NEAR(r.objective, r.trace.back(), 1e-9);
  }
}

TEST(KMeans, TiesAndErrors) {
  const Tensor c = Tensor::from_rows({{1, 0}, {-1, 0}});
  const std::vector<double> origin = {0, 0};
  EXPECT_EQ(kmeans_assign(origin, c), 0);
  const Tensor dup = Tensor::from_rows({{1, 1}, {1, 1}, {2, 2}});
  EXPECT_THROW(kmeans_fit(dup, 3, 5, 1), RangeError);
  EXPECT_NO_THROW(kmeans_fit(dup, 2, 5, 1));
}

TEST(Files, RoundTripAndErrors) {
  const auto dir = temp_dir("files");
  std::mt19937_64 rng(2);
  std::vector<FeatureSequence> xs = {{testing::random_tensor({5, 3}, rng)},
                                     {testing::random_tensor({9, 3}, rng)}};
  std::vector<UnitSequence> ys = {{{1, 2, 2}}, {}};
  write_features(dir + "/a.feat", xs, 3);
  write_units(dir + "/a.units", ys);
  const auto xs2 = read_features(dir + "/a.feat");
  ASSERT_EQ(xs2.size(), 2u);
  EXPECT_EQ(xs2[1].frames, xs[1].frames);
  EXPECT_EQ(read_units(dir + "/a.units"), ys);
  EXPECT_EQ(slurp(dir + "/a.units"), "1 2 2\n\n");
  EXPECT_EQ(slurp(dir + "/a.feat").substr(0, 4), "CS2F");

  const std::string bytes = slurp(dir + "/a.feat");
  std::ofstream(dir + "/cut.feat", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(read_features(dir + "/cut.feat"), IoError);
  std::ofstream(dir + "/bad.units") << "1 x 2\n";
  EXPECT_THROW(read_units(dir + "/bad.units"), IoError);
  EXPECT_THROW(write_features(dir + "/w.feat", xs, 4), ShapeError);

  std::vector<ManifestEntry> m;
  save_split(dir, "train", Dataset{xs, ys}, 3, &m);
  write_manifest(dir + "/manifest.tsv", m);
  const Dataset d = load_split(dir, "train");
  EXPECT_EQ(d.units, ys);
  try {
    load_split(dir, "test");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("test"), std::string::npos);
  }
  fs::remove(dir + "/train.units");
  try {
    load_split(dir, "train");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("train.units"), std::string::npos) << e.what();
  }
}

TEST(LearningRate, WarmupThenInverseSqrt) {
  EXPECT_DOUBLE_EQ(learning_rate(5000, 1e-3, 10000), 0.5e-3);
  EXPECT_DOUBLE_EQ(learning_rate(10000, 1e-3, 10000), 1e-3);
  EXPECT_DOUBLE_EQ(learning_rate(250, 3e-4, 500), 1.5e-4);
  EXPECT_DOUBLE_EQ(learning_rate(500, 3e-4, 500), 3e-4);
  EXPECT_DOUBLE_EQ(learning_rate(40000, 1e-3, 10000), 0.5e-3);
  for (std::size_t s = 10001; s < 10100; ++s) {
    EXPECT_LT(learning_rate(s, 1e-3, 10000), learning_rate(s - 1, 1e-3, 10000));
  }
}

TEST(Optimizer, AdamFirstStepAndClipping) {
  std::vector<Parameter> ps = {Parameter("w", Tensor::vector({1.0, -2.0}))};
  ps[0].gradient() = Tensor::vector({0.5, -4.0});
  Adam adam(0.9, 0.98, 1e-8);
  adam.step(ps, 0.1);
  // First bias-corrected step moves each weight by lr * g / |g|.
  EXPECT_NEAR(ps[0].value()[0], 1.0 - 0.1, 1e-7);
  EXPECT_NEAR(ps[0].value()[1], -2.0 + 0.1, 1e-7);

  ps[0].gradient() = Tensor::vector({3.0, 4.0});
  EXPECT_DOUBLE_EQ(clip_gradients(ps, 1.0), 5.0);
  EXPECT_NEAR(ps[0].gradient()[0], 0.6, 1e-12);
  EXPECT_NEAR(ps[0].gradient()[1], 0.8, 1e-12);
}

class TrainTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SynthTaskSpec spec = small_spec();
    spec.train_size = 24;
    spec.max_phones = 5;
    data_ = new SynthData(generate_dataset(spec));
  }
  static void TearDownTestSuite() { delete data_; }
  static SynthData* data_;
};

SynthData* TrainTest::data_ = nullptr;

std::vector<std::string> lines(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t columns(const std::string& line) {
  return std::count(line.begin(), line.end(), '\t') + 1;
}

TEST_F(TrainTest, MetricsLogColumns) {
  const auto dir = temp_dir("metrics");
  ArModel ar(micro_model(ModelVariant::kAr), 1);
  train(Stage::kAr, quick_train(3), data_->train, ar, dir + "/ar.tsv");
  auto ar_lines = lines(dir + "/ar.tsv");
  ASSERT_EQ(ar_lines.size(), 3u);
  for (const auto& l : ar_lines) EXPECT_EQ(columns(l), 4u) << l;
  EXPECT_EQ(ar_lines[0].substr(0, 5), "1\tar\t");

  NarModel nar(micro_model(ModelVariant::kNar), 1);
  const TrainResult r = train(Stage::kNarStage1, quick_train(3), data_->train, nar,
                              dir + "/nar.tsv");
  auto nar_lines = lines(dir + "/nar.tsv");
  ASSERT_EQ(nar_lines.size(), 3u);
  for (const auto& l : nar_lines) EXPECT_EQ(columns(l), 6u) << l;
  EXPECT_DOUBLE_EQ(r.steps[0].glance_ratio, 0.5);
  EXPECT_GE(r.steps[0].n_replaced_mean, 0.0);
}

TEST_F(TrainTest, BitwiseDeterministic) {
  auto run = [&] {
    NarModel m(micro_model(ModelVariant::kNar), 4);
    TrainConfig tc = quick_train(4);
    tc.seed = 17;
    auto r = train(Stage::kNarStage1, tc, data_->train, m);
    std::vector<double> losses;
    for (const auto& s : r.steps) losses.push_back(s.loss);
    return losses;
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a, b);
}

TEST_F(TrainTest, WrongModelForStage) {
  NarModel nar(micro_model(ModelVariant::kNar), 1);
  EXPECT_THROW(train(Stage::kAr, quick_train(1), data_->train, nar), ConfigError);
  ArModel ar(micro_model(ModelVariant::kAr), 1);
  EXPECT_THROW(train(Stage::kNarStage2, quick_train(1), data_->train, ar), ConfigError);
}

TEST_F(TrainTest, DivergenceGuard) {
  NarModel nan_model(micro_model(ModelVariant::kNar), 1);
  nan_model.parameters().find("decoder.proj.b")->value()[0] = std::nan("");
  EXPECT_THROW(train(Stage::kNarStage1, quick_train(2), data_->train, nan_model),
               TrainingDiverged);

  NarModel m(micro_model(ModelVariant::kNar), 1);
  TrainConfig tc = quick_train(200);
  tc.stage1 = {200, 500.0, 100000, 60};  // lr climbs to 1 by step 200
  tc.clip_norm = 0.0;
  EXPECT_THROW(train(Stage::kNarStage1, tc, data_->train, m), TrainingDiverged);
}

TEST_F(TrainTest, StageTwoStartsFromStageOneCheckpoint) {
  const auto dir = temp_dir("stage2");
  NarModel s1(micro_model(ModelVariant::kNar), 3);
  train(Stage::kNarStage1, quick_train(2), data_->train, s1);
  save_checkpoint(s1, dir + "/nar1.ckpt");
  NarModel s2(micro_model(ModelVariant::kNar), 99);
  load_checkpoint(s2, dir + "/nar1.ckpt");
  for (const Parameter& p : s1.parameters().all()) {
    ASSERT_EQ(s2.parameters().find(p.name())->value(), p.value()) << p.name();
  }
  const TrainResult r = train(Stage::kNarStage2, quick_train(2), data_->train, s2);
  EXPECT_EQ(r.steps.size(), 2u);
  EXPECT_DOUBLE_EQ(r.steps[0].glance_ratio, 0.3);
  for (const auto& s : r.steps) {
    EXPECT_GE(s.loss, 0.0);
    EXPECT_LE(s.loss, 1.0 + 1e-12);
  }
}

TEST_F(TrainTest, GlancingOffLogsZeroRatio) {
  NarModel m(micro_model(ModelVariant::kNar), 3);
  TrainConfig tc = quick_train(2);
  tc.glancing = false;
  const TrainResult r = train(Stage::kNarStage1, tc, data_->train, m);
  for (const auto& s : r.steps) {
    EXPECT_EQ(s.glance_ratio, 0.0);
    EXPECT_EQ(s.n_replaced_mean, 0.0);
  }
}

TEST(Distill, MemorizingTeacherReproducesTargets) {
  ModelConfig c = micro_model(ModelVariant::kAr);
  c.num_units = 3;
  c.feature_dim = 2;
  std::mt19937_64 rng(5);
  Dataset toy;
  toy.features = {{testing::random_tensor({8, 2}, rng)},
                  {testing::random_tensor({12, 2}, rng)},
                  {testing::random_tensor({10, 2}, rng)}};
  toy.units = {{{0, 1}}, {{2, 2, 1}}, {{1, 0, 2}}};
  ArModel teacher(c, 2);
  TrainConfig tc;
  tc.ar = {300, 1e-2, 10, 1};
  train(Stage::kAr, tc, toy, teacher);
  const DistillResult a = distill(teacher, toy);
  ASSERT_EQ(a.data.size(), toy.size());
  EXPECT_EQ(a.data.units, toy.units);
  EXPECT_EQ(a.data.features[1].frames, toy.features[1].frames);
  const DistillResult b = distill(teacher, toy);
  EXPECT_EQ(a.data.units, b.data.units);
}

TEST(Distill, EmptyTeacherOutputKeepsReference) {
  ModelConfig c = micro_model(ModelVariant::kAr);
  c.num_units = 3;
  c.feature_dim = 2;
  ArModel teacher(c, 2);
  // End-of-sequence first, always.
  teacher.parameters().find("decoder.proj.b")->value()[teacher.eos()] = 1e6;
  std::mt19937_64 rng(1);
  Dataset toy{{{testing::random_tensor({8, 2}, rng)}}, {{{1, 2}}}};
  const DistillResult r = distill(teacher, toy);
  EXPECT_EQ(r.kept_original, 1u);
  EXPECT_EQ(r.data.units[0], toy.units[0]);
}

}  // namespace
}  // namespace s2ut

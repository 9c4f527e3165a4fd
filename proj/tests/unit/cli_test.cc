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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status = -1;
  std::string output;  // stdout and stderr, merged
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(S2UT_CLI_PATH) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::array<char, 512> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / "s2ut_cli_test" /
            ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = (root_ / "tiny.ini").string();
    std::ofstream(config_) << "[data]\ntrain_size = 30\nvalid_size = 6\ntest_size = 8\n"
                              "max_phones = 5\nkmeans_restarts = 2\n"
                              "[model]\nencoder_layers = 1\ndecoder_layers = 1\n"
                              "d_model = 16\nheads = 2\nffn_dim = 32\nconv_kernel = 3\n"
                              "upsample = 5\nmax_positions = 128\ndropout = 0.0\n"
                              "[train]\nar_steps = 2\nstage1_steps = 2\nstage2_steps = 2\n"
                              "ar_batch_frames = 60\nstage1_batch_frames = 60\n"
                              "stage2_batch_frames = 60\n"
                              "[bench]\nedges = 10,20\nwarmup = 1\n";
  }

  std::string base(const std::string& out) const {
    return "--config " + config_ + " --out " + (root_ / out).string();
  }

  fs::path root_;
  std::string config_;
};

TEST_F(CliTest, GenDataIsReproducible) {
  ASSERT_EQ(run("gen-data " + base("a")).status, 0);
  ASSERT_EQ(run("gen-data " + base("b")).status, 0);
  for (const char* f : {"manifest.tsv", "train.feat", "train.units", "test.units"}) {
    const std::string a = slurp(root_ / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(root_ / "b" / f)) << f;
  }
}

TEST_F(CliTest, EvalOfReferencesIsPerfect) {
  ASSERT_EQ(run("gen-data " + base("data")).status, 0);
  const std::string data = (root_ / "data").string();
  const Outcome r = run("eval " + base("eval") + " --data " + data + " --hyp " + data +
                    "/test.units");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(r.output, "unit-BLEU 1\n");
}

TEST_F(CliTest, FullChainAndBench) {
  ASSERT_EQ(run("gen-data " + base("data")).status, 0);
  const std::string data = " --data " + (root_ / "data").string();
  const fs::path w = root_ / "w";
  ASSERT_EQ(run("train-ar " + base("w") + data).status, 0);
  EXPECT_TRUE(fs::exists(w / "ar.ckpt"));
  EXPECT_TRUE(fs::exists(w / "ar.metrics.tsv"));
  const std::string ar = " --ckpt " + (w / "ar.ckpt").string();
  ASSERT_EQ(run("distill " + base("kd") + data + ar).status, 0);
  const std::string kd = " --data " + (root_ / "kd").string();
  ASSERT_EQ(run("train-nar " + base("w") + kd + ar).status, 0);
  const std::string nar1 = " --ckpt " + (w / "nar1.ckpt").string();
  ASSERT_EQ(run("finetune-nmla " + base("w") + kd + nar1).status, 0);
  EXPECT_TRUE(fs::exists(w / "nar2.ckpt"));
  const Outcome e = run("eval " + base("w") + data + " --ckpt " + (w / "nar2.ckpt").string());
  EXPECT_EQ(e.status, 0) << e.output;
  EXPECT_EQ(e.output.rfind("unit-BLEU ", 0), 0u) << e.output;

  const Outcome b = run("bench " + base("bench") + data + ar + " --nar-ckpt " +
                    (w / "nar2.ckpt").string());
  EXPECT_EQ(b.status, 0) << b.output;
  const std::string table = slurp(root_ / "bench" / "bench.txt");
  const std::string tsv = slurp(root_ / "bench" / "bench.tsv");
  EXPECT_FALSE(table.empty());
  EXPECT_NE(tsv.find('\t'), std::string::npos);
}

TEST_F(CliTest, ErrorsCarryCodes) {
  std::ofstream(root_ / "bad.ini") << "[model]\nd_modle = 8\n";
  Outcome r = run("gen-data --config " + (root_ / "bad.ini").string() + " --out " +
              (root_ / "x").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.output.rfind("E_CONFIG: ", 0), 0u) << r.output;
  EXPECT_NE(r.output.find("d_modle"), std::string::npos);

  const std::string missing = (root_ / "nowhere").string();
  r = run("train-ar " + base("x") + " --data " + missing);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.output.rfind("E_IO: ", 0), 0u) << r.output;
  EXPECT_NE(r.output.find(missing + "/manifest.tsv"), std::string::npos) << r.output;

  r = run("frobnicate");
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.output.rfind("E_USAGE", 0), 0u) << r.output;
}

TEST_F(CliTest, MissingCheckpointNamesPath) {
  ASSERT_EQ(run("gen-data " + base("data")).status, 0);
  const std::string ckpt = (root_ / "absent.ckpt").string();
  const Outcome r = run("finetune-nmla " + base("w") + " --data " + (root_ / "data").string() +
                    " --ckpt " + ckpt);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find(ckpt), std::string::npos) << r.output;
}

}  // namespace

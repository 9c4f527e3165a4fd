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
#include <random>

#include "oracles.h"
#include "s2ut/error.h"
#include "s2ut/ops.h"

namespace s2ut {
namespace {

using testing::grad_check;
using testing::random_tensor;
using testing::weighted_sum;

constexpr double kGradTol = 1e-4;

TEST(Matmul, IdentityAndScalar) {
  Tensor m = Tensor::from_rows({{1.5, -2.0, 0.25}, {3.0, 4.0, -1.0}});
  Var out = matmul(constant(Tensor::from_rows({{1, 0}, {0, 1}})), constant(m));
  EXPECT_EQ(out->value, m);

  Var s = matmul(constant(Tensor::from_rows({{2}})), constant(Tensor::from_rows({{3}})));
  EXPECT_DOUBLE_EQ(s->value[0], 6.0);
}

TEST(Matmul, ShapeMismatchReportsBothShapes) {
  try {
    matmul(constant(Tensor::matrix(2, 3)), constant(Tensor::matrix(2, 3)));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("(2, 3) x (2, 3)"), std::string::npos);
  }
}

TEST(Matmul, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  auto report = grad_check(
      [](const std::vector<Var>& v) { return weighted_sum(matmul(v[0], v[1]), 1); },
      {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)});
  EXPECT_LT(report.max_rel_error, 1e-6);
}

TEST(LogSoftmax, UniformAndOverflow) {
  Var out = log_softmax(constant(Tensor::vector({0, 0, 0})), 0);
  for (double v : out->value.data()) EXPECT_NEAR(v, -std::log(3.0), 1e-15);

  Var big = log_softmax(constant(Tensor::vector({1000, 0})), 0);
  EXPECT_TRUE(big->value.all_finite());
  EXPECT_NEAR(big->value[0], 0.0, 1e-12);
  EXPECT_NEAR(big->value[1], -1000.0, 1e-9);
}

TEST(LogSoftmax, SlicesNormalizeOnEitherAxis) {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor({5, 7}, rng, -10, 10);
  for (std::size_t axis : {0u, 1u}) {
    Var out = log_softmax(constant(x), axis);
    const std::size_t outer = axis == 1 ? 5 : 7, len = axis == 1 ? 7 : 5;
    for (std::size_t s = 0; s < outer; ++s) {
      double z = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        z += std::exp(axis == 1 ? out->value(s, i) : out->value(i, s));
      }
      EXPECT_NEAR(z, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(log_softmax(constant(x), 2), ShapeError);
}

TEST(LayerNorm, ConstantRowMapsToZero) {
  Var out = layer_norm(constant(Tensor::from_rows({{3.0, 3.0, 3.0, 3.0}})), nullptr, nullptr);
  for (double v : out->value.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv1d, IdentityKernelIsIdentity) {
  std::mt19937_64 rng(11);
  Tensor x = random_tensor({6, 3}, rng);
  Tensor w({1, 3, 3}, 0.0);
  for (std::size_t c = 0; c < 3; ++c) w(0, c * 3 + c) = 1.0;  // w[0][c][c]
  Var out = conv1d(constant(x), constant(w), nullptr, 1, 0);
  EXPECT_EQ(out->value, x);

  Tensor dw = Tensor::matrix(3, 3);
  for (std::size_t c = 0; c < 3; ++c) dw(1, c) = 1.0;
  Var dout = depthwise_conv1d(constant(x), constant(dw), nullptr, 1);
  EXPECT_EQ(dout->value, x);
}

TEST(Conv1d, StrideTwoKernelFourHalvesLength) {
  for (std::size_t n = 4; n < 40; ++n) {
    Var out = conv1d(constant(Tensor::matrix(n, 2)), constant(Tensor({4, 2, 3})), nullptr, 2, 1);
    EXPECT_EQ(out->value.rows(), n / 2);
  }
}

TEST(Attention, SinglePositionReturnsItsValue) {
  std::mt19937_64 rng(5);
  Tensor q = random_tensor({3, 4}, rng);
  Tensor k = random_tensor({1, 4}, rng);
  Tensor v = random_tensor({1, 4}, rng);
  Var out = scaled_dot_product_attention(constant(q), constant(k), constant(v), 2, false);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(out->value(i, j), v(0, j));
  }
}

TEST(Attention, CausalFirstQuerySeesOnlyFirstKey) {
  std::mt19937_64 rng(9);
  Tensor x = random_tensor({4, 4}, rng);
  Var out = scaled_dot_product_attention(constant(x), constant(x), constant(x), 1, true);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(out->value(0, j), x(0, j));
}

TEST(Embedding, OutOfRangeIdRejected) {
  std::vector<int> ids{0, 3};
  EXPECT_THROW(embedding_lookup(constant(Tensor::matrix(3, 2)), ids), RangeError);
}

TEST(ReplaceRows, RowsComeFromTable) {
  Tensor base = Tensor::from_rows({{1, 1}, {2, 2}, {3, 3}});
  Tensor table = Tensor::from_rows({{7, 8}, {9, 10}});
  std::vector<std::size_t> pos{2, 0};
  std::vector<int> ids{1, 0};
  Var out = replace_rows(constant(base), constant(table), pos, ids);
  EXPECT_EQ(out->value, Tensor::from_rows({{7, 8}, {2, 2}, {9, 10}}));
}

TEST(Upsample, RowIndexIsFloorDivision) {
  Tensor h = Tensor::from_rows({{0, 0}, {1, 1}, {2, 2}});
  Var out = upsample_rows(constant(h), 2);
  ASSERT_EQ(out->value.rows(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(out->value(i, 0), static_cast<double>(i / 2));
}

// Every differentiable op against central differences, inputs in [-2, 2].
class GradientContract : public ::testing::TestWithParam<int> {};

TEST_P(GradientContract, Ops) {
  std::mt19937_64 rng(100 + GetParam());
  auto check = [&](const char* name, auto f, std::vector<Tensor> inputs) {
    auto r = grad_check(f, inputs);
    EXPECT_LT(r.max_rel_error, kGradTol) << name;
  };
  check("add", [](const std::vector<Var>& v) { return weighted_sum(add(v[0], v[1]), 2); },
        {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)});
  check("mul", [](const std::vector<Var>& v) { return weighted_sum(mul(v[0], v[1]), 3); },
        {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)});
  check("linear",
        [](const std::vector<Var>& v) { return weighted_sum(linear(v[0], v[1], v[2]), 4); },
        {random_tensor({5, 3}, rng), random_tensor({3, 4}, rng), random_tensor({4}, rng)});
  check("gelu", [](const std::vector<Var>& v) { return weighted_sum(gelu(v[0]), 5); },
        {random_tensor({4, 4}, rng)});
  check("relu", [](const std::vector<Var>& v) { return weighted_sum(relu(v[0]), 6); },
        {random_tensor({4, 4}, rng)});
  check("layer_norm",
        [](const std::vector<Var>& v) {
          return weighted_sum(layer_norm(v[0], v[1], v[2]), 7);
        },
        {random_tensor({4, 6}, rng), random_tensor({6}, rng), random_tensor({6}, rng)});
  check("conv1d",
        [](const std::vector<Var>& v) { return weighted_sum(conv1d(v[0], v[1], v[2], 2, 1), 8); },
        {random_tensor({9, 3}, rng), random_tensor({4, 3, 2}, rng), random_tensor({2}, rng)});
  check("depthwise_conv1d",
        [](const std::vector<Var>& v) {
          return weighted_sum(depthwise_conv1d(v[0], v[1], v[2], 2), 9);
        },
        {random_tensor({7, 3}, rng), random_tensor({5, 3}, rng), random_tensor({3}, rng)});
  check("embedding_lookup",
        [](const std::vector<Var>& v) {
          std::vector<int> ids{2, 0, 2, 1};
          return weighted_sum(embedding_lookup(v[0], ids), 10);
        },
        {random_tensor({3, 4}, rng)});
  check("log_softmax rows",
        [](const std::vector<Var>& v) { return weighted_sum(log_softmax(v[0], 1), 11); },
        {random_tensor({3, 5}, rng)});
  check("log_softmax cols",
        [](const std::vector<Var>& v) { return weighted_sum(log_softmax(v[0], 0), 12); },
        {random_tensor({3, 5}, rng)});
  check("attention",
        [](const std::vector<Var>& v) {
          return weighted_sum(scaled_dot_product_attention(v[0], v[1], v[2], 2, false), 13);
        },
        {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng), random_tensor({5, 4}, rng)});
  check("causal attention",
        [](const std::vector<Var>& v) {
          return weighted_sum(scaled_dot_product_attention(v[0], v[0], v[1], 2, true), 14);
        },
        {random_tensor({4, 4}, rng), random_tensor({4, 4}, rng)});
  check("attention_block",
        [](const std::vector<Var>& v) {
          // No key bias: it shifts every score of a query equally.
          AttentionWeights w{v[2], v[3], v[4], nullptr, v[5], v[6], v[7], v[8]};
          return weighted_sum(attention_block(v[0], v[1], w, 2, false), 15);
        },
        {random_tensor({3, 4}, rng), random_tensor({2, 4}, rng), random_tensor({4, 4}, rng),
         random_tensor({4}, rng), random_tensor({4, 4}, rng), random_tensor({4, 4}, rng),
         random_tensor({4}, rng), random_tensor({4, 4}, rng), random_tensor({4}, rng)});
  check("upsample_rows",
        [](const std::vector<Var>& v) { return weighted_sum(upsample_rows(v[0], 3), 16); },
        {random_tensor({2, 3}, rng)});
  check("replace_rows",
        [](const std::vector<Var>& v) {
          std::vector<std::size_t> pos{1, 3};
          std::vector<int> ids{0, 0};
          return weighted_sum(replace_rows(v[0], v[1], pos, ids), 17);
        },
        {random_tensor({4, 3}, rng), random_tensor({2, 3}, rng)});
  check("nll_loss",
        [](const std::vector<Var>& v) {
          std::vector<int> t{1, 0, 2};
          return nll_loss(log_softmax(v[0], 1), t);
        },
        {random_tensor({3, 3}, rng)});
}

INSTANTIATE_TEST_SUITE_P(RandomInputs, GradientContract, ::testing::Range(0, 5));

TEST(Determinism, ForwardIsBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(42);
    Tensor x = random_tensor({6, 4}, rng, -10, 10);
    Tensor w = random_tensor({4, 4}, rng);
    return layer_norm(gelu(matmul(constant(x), constant(w))), nullptr, nullptr)->value;
  };
  EXPECT_EQ(run(), run());
}

TEST(Finiteness, LargeInputsStayFinite) {
  std::mt19937_64 rng(8);
  Tensor x = random_tensor({8, 4}, rng, -10, 10);
  Var a = scaled_dot_product_attention(constant(x), constant(x), constant(x), 2, true);
  Var out = log_softmax(layer_norm(gelu(a), nullptr, nullptr), 1);
  EXPECT_TRUE(out->value.all_finite());
}

TEST(Parameter, ZeroGradClearsAccumulation) {
  Parameter p("w", Tensor::from_rows({{1, 2}}));
  backward(sum(mul(p.var(), constant(Tensor::from_rows({{3, 4}})))));
  EXPECT_EQ(p.gradient(), Tensor::from_rows({{3, 4}}));
  p.zero_grad();
  EXPECT_EQ(p.gradient(), Tensor::from_rows({{0, 0}}));
}

TEST(NoGrad, GuardSkipsGraph) {
  Var w = leaf(Tensor::from_rows({{1}}));
  {
    NoGradGuard guard;
    Var out = scale(w, 2.0);
    EXPECT_FALSE(out->requires_grad);
  }
  EXPECT_TRUE(scale(w, 2.0)->requires_grad);
}

}  // namespace
}  // namespace s2ut

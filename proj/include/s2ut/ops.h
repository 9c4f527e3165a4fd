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

#ifndef S2UT_OPS_H_
#define S2UT_OPS_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "s2ut/autograd.h"

namespace s2ut {

// Differentiable ops over Var. Sequences are (rows = time, cols = features).
// All shape violations throw ShapeError naming the offending shapes.

Var matmul(const Var& a, const Var& b);  // (n,k) x (k,m)
Var add(const Var& a, const Var& b);     // same shape
Var mul(const Var& a, const Var& b);     // elementwise, same shape
Var scale(const Var& a, double s);
Var add_row(const Var& x, const Var& bias);  // x (n,c) + bias (c) per row

// x (n,in) W (in,out) b (out) or null.
Var linear(const Var& x, const Var& w, const Var& b);

Var relu(const Var& x);
Var gelu(const Var& x);  // exact erf form

inline constexpr double kLayerNormEps = 1e-5;

// Normalizes each row; gamma/beta (c) may be null for no affine transform.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta,
               double eps = kLayerNormEps);

// x (n,in), w (k,in,out), b (out) or null. Output length
// (n + 2*padding - k) / stride + 1, zero padding.
Var conv1d(const Var& x, const Var& w, const Var& b, std::size_t stride,
           std::size_t padding);

// Per-channel convolution, stride 1. x (n,c), w (k,c), b (c) or null.
Var depthwise_conv1d(const Var& x, const Var& w, const Var& b,
                     std::size_t padding);

Var embedding_lookup(const Var& table, std::span<const int> ids);

// axis 0 or 1 for matrices, 0 for vectors.
Var log_softmax(const Var& x, std::size_t axis);

// Row i of the result is row floor(i / factor) of x.
Var upsample_rows(const Var& x, std::size_t factor);
Var slice_rows(const Var& x, std::size_t begin, std::size_t count);

// Copy of base where row positions[j] is replaced by table row ids[j].
Var replace_rows(const Var& base, const Var& table,
                 std::span<const std::size_t> positions,
                 std::span<const int> ids);

// Inverted dropout. Identity when p == 0.
Var dropout(const Var& x, double p, std::mt19937_64& rng);

Var sum(const Var& x);

// -sum_i x(i, targets[i]).
Var nll_loss(const Var& log_probs, std::span<const int> targets);

// Scalar node with externally computed value and d(value)/d(input).
// Used to splice closed-form losses (CTC, NMLA) into the graph.
Var scalar_with_gradient(const Var& input, double value, Tensor gradient);

// Multi-head scaled dot-product attention over pre-projected q, k, v.
// Head h uses columns [h*dh, (h+1)*dh) with dh = cols / heads. With causal
// set, query i attends to keys j <= i + (tk - tq).
Var scaled_dot_product_attention(const Var& q, const Var& k, const Var& v,
                                 std::size_t heads, bool causal);

// Any bias may be null. The model leaves bk null: a key bias adds the same
// constant to every score of a query and cancels in the softmax.
struct AttentionWeights {
  Var wq, bq, wk, bk, wv, bv, wo, bo;
};

// Projections, attention, and output projection.
Var attention_block(const Var& query_input, const Var& memory,
                    const AttentionWeights& w, std::size_t heads,
                    bool causal);

}  // namespace s2ut

#endif  // S2UT_OPS_H_

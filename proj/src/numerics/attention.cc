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

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "s2ut/error.h"
#include "s2ut/ops.h"

namespace s2ut {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMat>;
using MatMap = Eigen::Map<RowMat>;

}  // namespace

Var scaled_dot_product_attention(const Var& q, const Var& k, const Var& v,
                                 std::size_t heads, bool causal) {
  const Tensor& qv = q->value;
  const Tensor& kv = k->value;
  const Tensor& vv = v->value;
  if (qv.rank() != 2 || kv.rank() != 2 || vv.rank() != 2 ||
      qv.cols() != kv.cols() || kv.shape() != vv.shape()) {
    throw ShapeError("attention shape mismatch: q " + qv.shape_str() + ", k " +
                     kv.shape_str() + ", v " + vv.shape_str());
  }
  const std::size_t d = qv.cols();
  if (heads == 0 || d % heads != 0) {
    throw ShapeError("attention width " + std::to_string(d) +
                     " not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t tq = qv.rows(), tk = kv.rows(), dh = d / heads;
  if (tk == 0) throw ShapeError("attention over an empty memory");
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const long offset = static_cast<long>(tk) - static_cast<long>(tq);

  const ConstMatMap qm(qv.raw(), tq, d), km(kv.raw(), tk, d), vm(vv.raw(), tk, d);
  Tensor out = Tensor::matrix(tq, d);
  MatMap om(out.raw(), tq, d);
  std::vector<RowMat> probs(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    RowMat s = (qm.middleCols(h * dh, dh) * km.middleCols(h * dh, dh).transpose()) * scale;
    for (std::size_t i = 0; i < tq; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < tk; ++j) {
        if (causal && static_cast<long>(j) > static_cast<long>(i) + offset) {
          s(i, j) = -std::numeric_limits<double>::infinity();
        }
        mx = std::max(mx, s(i, j));
      }
      double z = 0.0;
      for (std::size_t j = 0; j < tk; ++j) {
        s(i, j) = std::exp(s(i, j) - mx);
        z += s(i, j);
      }
      s.row(i) /= z;
    }
    om.middleCols(h * dh, dh).noalias() = s * vm.middleCols(h * dh, dh);
    probs[h] = std::move(s);
  }

  return make_node(
      std::move(out), {q, k, v},
      [probs = std::move(probs), heads, dh, scale](Node& n) {
        const Tensor& qv = n.parents[0]->value;
        const Tensor& kv = n.parents[1]->value;
        const Tensor& vv = n.parents[2]->value;
        const std::size_t tq = qv.rows(), tk = kv.rows(), d = qv.cols();
        const ConstMatMap qm(qv.raw(), tq, d), km(kv.raw(), tk, d),
            vm(vv.raw(), tk, d), gm(n.grad.raw(), tq, d);
        Node& qn = *n.parents[0];
        Node& kn = *n.parents[1];
        Node& vn = *n.parents[2];
        for (std::size_t h = 0; h < heads; ++h) {
          const RowMat& a = probs[h];
          const auto go = gm.middleCols(h * dh, dh);
          if (vn.requires_grad) {
            MatMap(vn.ensure_grad().raw(), tk, d).middleCols(h * dh, dh).noalias() +=
                a.transpose() * go;
          }
          if (!qn.requires_grad && !kn.requires_grad) continue;
          RowMat da = go * vm.middleCols(h * dh, dh).transpose();
          // Softmax backward: ds = a * (da - rowsum(da * a)).
          Eigen::VectorXd dot = (da.array() * a.array()).rowwise().sum();
          RowMat ds = (a.array() * (da.colwise() - dot).array()).matrix() * scale;
          if (qn.requires_grad) {
            MatMap(qn.ensure_grad().raw(), tq, d).middleCols(h * dh, dh).noalias() +=
                ds * km.middleCols(h * dh, dh);
          }
          if (kn.requires_grad) {
            MatMap(kn.ensure_grad().raw(), tk, d).middleCols(h * dh, dh).noalias() +=
                ds.transpose() * qm.middleCols(h * dh, dh);
          }
        }
      });
}

Var attention_block(const Var& query_input, const Var& memory,
                    const AttentionWeights& w, std::size_t heads,
                    bool causal) {
  Var q = linear(query_input, w.wq, w.bq);
  Var k = linear(memory, w.wk, w.bk);
  Var v = linear(memory, w.wv, w.bv);
  return linear(scaled_dot_product_attention(q, k, v, heads, causal), w.wo, w.bo);
}

}  // namespace s2ut

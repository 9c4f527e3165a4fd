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

#include "s2ut/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "s2ut/error.h"

namespace s2ut {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap as_mat(const Tensor& t) {
  return ConstMatMap(t.raw(), t.rows(), t.cols());
}
MatMap as_mat(Tensor& t) { return MatMap(t.raw(), t.rows(), t.cols()); }

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + " expects a matrix, got " + t.shape_str());
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + " shape mismatch: " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

// Parent gradient accessor that skips constants.
Tensor* grad_of(Node& n, std::size_t i) {
  Node& p = *n.parents[i];
  return p.requires_grad ? &p.ensure_grad() : nullptr;
}

template <typename F>
Var unary(const Var& x, F&& f, auto&& df) {
  Tensor out(x->value.shape());
  const auto& in = x->value;
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_node(std::move(out), {x}, [df](Node& n) {
    Tensor* gx = grad_of(n, 0);
    if (!gx) return;
    const auto& in = n.parents[0]->value;
    for (std::size_t i = 0; i < in.size(); ++i) (*gx)[i] += n.grad[i] * df(in[i]);
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_matrix(a->value, "matmul");
  require_matrix(b->value, "matmul");
  if (a->value.dim(1) != b->value.dim(0)) {
    throw ShapeError("matmul inner dimensions disagree: " + a->value.shape_str() +
                     " x " + b->value.shape_str());
  }
  Tensor out = Tensor::matrix(a->value.dim(0), b->value.dim(1));
  as_mat(out).noalias() = as_mat(a->value) * as_mat(b->value);
  return make_node(std::move(out), {a, b}, [](Node& n) {
    const auto g = as_mat(std::as_const(n.grad));
    if (Tensor* ga = grad_of(n, 0)) {
      as_mat(*ga).noalias() += g * as_mat(n.parents[1]->value).transpose();
    }
    if (Tensor* gb = grad_of(n, 1)) {
      as_mat(*gb).noalias() += as_mat(n.parents[0]->value).transpose() * g;
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same(a->value, b->value, "add");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* g = grad_of(n, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i];
      }
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a->value, b->value, "mul");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    const auto& av = n.parents[0]->value;
    const auto& bv = n.parents[1]->value;
    if (Tensor* ga = grad_of(n, 0)) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += n.grad[i] * bv[i];
    }
    if (Tensor* gb = grad_of(n, 1)) {
      for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += n.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (auto& v : out.data()) v *= s;
  return make_node(std::move(out), {a}, [s](Node& n) {
    if (Tensor* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += s * n.grad[i];
    }
  });
}

Var add_row(const Var& x, const Var& bias) {
  require_matrix(x->value, "add_row");
  if (bias->value.size() != x->value.cols()) {
    throw ShapeError("add_row bias " + bias->value.shape_str() +
                     " does not match rows of " + x->value.shape_str());
  }
  Tensor out = x->value;
  const std::size_t c = out.cols();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t j = 0; j < c; ++j) out(r, j) += bias->value[j];
  }
  return make_node(std::move(out), {x, bias}, [](Node& n) {
    if (Tensor* gx = grad_of(n, 0)) {
      for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += n.grad[i];
    }
    if (Tensor* gb = grad_of(n, 1)) {
      const std::size_t c = n.grad.cols();
      for (std::size_t r = 0; r < n.grad.rows(); ++r) {
        for (std::size_t j = 0; j < c; ++j) (*gb)[j] += n.grad(r, j);
      }
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  require_matrix(x->value, "linear");
  require_matrix(w->value, "linear");
  if (x->value.cols() != w->value.dim(0)) {
    throw ShapeError("linear input " + x->value.shape_str() +
                     " does not match weight " + w->value.shape_str());
  }
  const std::size_t out_dim = w->value.dim(1);
  if (b && b->value.size() != out_dim) {
    throw ShapeError("linear bias " + b->value.shape_str() +
                     " does not match weight " + w->value.shape_str());
  }
  Tensor out = Tensor::matrix(x->value.rows(), out_dim);
  auto o = as_mat(out);
  o.noalias() = as_mat(x->value) * as_mat(w->value);
  if (b) {
    Eigen::Map<const Eigen::RowVectorXd> bv(b->value.raw(), out_dim);
    o.rowwise() += bv;
  }
  std::vector<Var> parents{x, w};
  if (b) parents.push_back(b);
  return make_node(std::move(out), std::move(parents), [](Node& n) {
    const auto g = as_mat(std::as_const(n.grad));
    if (Tensor* gx = grad_of(n, 0)) {
      as_mat(*gx).noalias() += g * as_mat(n.parents[1]->value).transpose();
    }
    if (Tensor* gw = grad_of(n, 1)) {
      as_mat(*gw).noalias() += as_mat(n.parents[0]->value).transpose() * g;
    }
    if (n.parents.size() > 2) {
      if (Tensor* gb = grad_of(n, 2)) {
        Eigen::Map<Eigen::RowVectorXd> gbv(gb->raw(), gb->size());
        gbv += g.colwise().sum();
      }
    }
  });
}

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var gelu(const Var& x) {
  return unary(
      x,
      [](double v) { return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2)); },
      [](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2));
        const double pdf =
            std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + v * pdf;
      });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_matrix(x->value, "layer_norm");
  const std::size_t rows = x->value.rows(), c = x->value.cols();
  if ((gamma && gamma->value.size() != c) || (beta && beta->value.size() != c)) {
    throw ShapeError("layer_norm affine parameters do not match width of " +
                     x->value.shape_str());
  }
  Tensor xhat(x->value.shape());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = x->value.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) xhat(r, j) = (in[j] - mean) * inv_std[r];
  }
  Tensor out = xhat;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < c; ++j) {
      if (gamma) out(r, j) *= gamma->value[j];
      if (beta) out(r, j) += beta->value[j];
    }
  }
  std::vector<Var> parents{x};
  if (gamma) parents.push_back(gamma);
  if (beta) parents.push_back(beta);
  const bool has_gamma = static_cast<bool>(gamma);
  const bool has_beta = static_cast<bool>(beta);
  return make_node(
      std::move(out), std::move(parents),
      [xhat = std::move(xhat), inv_std = std::move(inv_std), has_gamma,
       has_beta](Node& n) {
        const std::size_t rows = xhat.rows(), c = xhat.cols();
        const Tensor* gamma_v = has_gamma ? &n.parents[1]->value : nullptr;
        Tensor* gx = grad_of(n, 0);
        Tensor* gg = has_gamma ? grad_of(n, 1) : nullptr;
        Tensor* gb = has_beta ? grad_of(n, has_gamma ? 2 : 1) : nullptr;
        std::vector<double> dxhat(c);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double g = n.grad(r, j);
            if (gg) (*gg)[j] += g * xhat(r, j);
            if (gb) (*gb)[j] += g;
            dxhat[j] = gamma_v ? g * (*gamma_v)[j] : g;
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xhat(r, j);
          }
          if (!gx) continue;
          mean_d /= static_cast<double>(c);
          mean_dx /= static_cast<double>(c);
          for (std::size_t j = 0; j < c; ++j) {
            (*gx)(r, j) += inv_std[r] * (dxhat[j] - mean_d - xhat(r, j) * mean_dx);
          }
        }
      });
}

Var conv1d(const Var& x, const Var& w, const Var& b, std::size_t stride,
           std::size_t padding) {
  require_matrix(x->value, "conv1d");
  if (w->value.rank() != 3 || w->value.dim(1) != x->value.cols()) {
    throw ShapeError("conv1d kernel " + w->value.shape_str() +
                     " does not match input " + x->value.shape_str());
  }
  if (stride == 0) throw ShapeError("conv1d stride must be positive");
  const std::size_t n_in = x->value.rows(), c_in = x->value.cols();
  const std::size_t k = w->value.dim(0), c_out = w->value.dim(2);
  if (n_in + 2 * padding < k) {
    throw ShapeError("conv1d input " + x->value.shape_str() +
                     " is shorter than kernel " + w->value.shape_str());
  }
  if (b && b->value.size() != c_out) {
    throw ShapeError("conv1d bias " + b->value.shape_str() +
                     " does not match kernel " + w->value.shape_str());
  }
  const std::size_t n_out = (n_in + 2 * padding - k) / stride + 1;

  // im2col: row o holds the k*c_in receptive field of output o.
  Tensor cols = Tensor::matrix(n_out, k * c_in);
  for (std::size_t o = 0; o < n_out; ++o) {
    for (std::size_t j = 0; j < k; ++j) {
      const long src = static_cast<long>(o * stride + j) - static_cast<long>(padding);
      if (src < 0 || src >= static_cast<long>(n_in)) continue;
      auto in = x->value.row(static_cast<std::size_t>(src));
      std::copy(in.begin(), in.end(), cols.raw() + o * k * c_in + j * c_in);
    }
  }
  Tensor out = Tensor::matrix(n_out, c_out);
  const ConstMatMap wm(w->value.raw(), k * c_in, c_out);
  as_mat(out).noalias() = as_mat(cols) * wm;
  if (b) {
    Eigen::Map<const Eigen::RowVectorXd> bv(b->value.raw(), c_out);
    as_mat(out).rowwise() += bv;
  }
  std::vector<Var> parents{x, w};
  if (b) parents.push_back(b);
  return make_node(
      std::move(out), std::move(parents),
      [cols = std::move(cols), stride, padding, k](Node& n) {
        const auto g = as_mat(std::as_const(n.grad));
        const std::size_t n_in = n.parents[0]->value.rows();
        const std::size_t c_in = n.parents[0]->value.cols();
        const std::size_t c_out = n.grad.cols();
        if (Tensor* gw = grad_of(n, 1)) {
          MatMap gwm(gw->raw(), k * c_in, c_out);
          gwm.noalias() += as_mat(cols).transpose() * g;
        }
        if (n.parents.size() > 2) {
          if (Tensor* gb = grad_of(n, 2)) {
            Eigen::Map<Eigen::RowVectorXd> gbv(gb->raw(), gb->size());
            gbv += g.colwise().sum();
          }
        }
        if (Tensor* gx = grad_of(n, 0)) {
          const ConstMatMap wm(n.parents[1]->value.raw(), k * c_in, c_out);
          RowMat dcols = g * wm.transpose();
          for (std::size_t o = 0; o < n.grad.rows(); ++o) {
            for (std::size_t j = 0; j < k; ++j) {
              const long src =
                  static_cast<long>(o * stride + j) - static_cast<long>(padding);
              if (src < 0 || src >= static_cast<long>(n_in)) continue;
              double* dst = gx->raw() + static_cast<std::size_t>(src) * c_in;
              const double* from = dcols.data() + o * k * c_in + j * c_in;
              for (std::size_t c = 0; c < c_in; ++c) dst[c] += from[c];
            }
          }
        }
      });
}

Var depthwise_conv1d(const Var& x, const Var& w, const Var& b,
                     std::size_t padding) {
  require_matrix(x->value, "depthwise_conv1d");
  require_matrix(w->value, "depthwise_conv1d");
  const std::size_t n_in = x->value.rows(), c = x->value.cols();
  const std::size_t k = w->value.dim(0);
  if (w->value.dim(1) != c || (b && b->value.size() != c)) {
    throw ShapeError("depthwise_conv1d kernel " + w->value.shape_str() +
                     " does not match input " + x->value.shape_str());
  }
  if (n_in + 2 * padding < k) {
    throw ShapeError("depthwise_conv1d input " + x->value.shape_str() +
                     " is shorter than kernel " + w->value.shape_str());
  }
  const std::size_t n_out = n_in + 2 * padding - k + 1;
  Tensor out = Tensor::matrix(n_out, c);
  for (std::size_t o = 0; o < n_out; ++o) {
    for (std::size_t j = 0; j < k; ++j) {
      const long src = static_cast<long>(o + j) - static_cast<long>(padding);
      if (src < 0 || src >= static_cast<long>(n_in)) continue;
      for (std::size_t ch = 0; ch < c; ++ch) {
        out(o, ch) += x->value(static_cast<std::size_t>(src), ch) * w->value(j, ch);
      }
    }
    if (b) {
      for (std::size_t ch = 0; ch < c; ++ch) out(o, ch) += b->value[ch];
    }
  }
  std::vector<Var> parents{x, w};
  if (b) parents.push_back(b);
  return make_node(std::move(out), std::move(parents), [padding](Node& n) {
    const auto& xv = n.parents[0]->value;
    const auto& wv = n.parents[1]->value;
    const std::size_t n_in = xv.rows(), c = xv.cols(), k = wv.dim(0);
    Tensor* gx = grad_of(n, 0);
    Tensor* gw = grad_of(n, 1);
    Tensor* gb = n.parents.size() > 2 ? grad_of(n, 2) : nullptr;
    for (std::size_t o = 0; o < n.grad.rows(); ++o) {
      for (std::size_t j = 0; j < k; ++j) {
        const long src = static_cast<long>(o + j) - static_cast<long>(padding);
        if (src < 0 || src >= static_cast<long>(n_in)) continue;
        const auto s = static_cast<std::size_t>(src);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double g = n.grad(o, ch);
          if (gx) (*gx)(s, ch) += g * wv(j, ch);
          if (gw) (*gw)(j, ch) += g * xv(s, ch);
        }
      }
      if (gb) {
        for (std::size_t ch = 0; ch < c; ++ch) (*gb)[ch] += n.grad(o, ch);
      }
    }
  });
}

Var embedding_lookup(const Var& table, std::span<const int> ids) {
  require_matrix(table->value, "embedding_lookup");
  const std::size_t vocab = table->value.rows(), c = table->value.cols();
  Tensor out = Tensor::matrix(ids.size(), c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw RangeError("embedding id " + std::to_string(ids[i]) +
                       " outside table of " + std::to_string(vocab) + " rows");
    }
    auto src = table->value.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return make_node(std::move(out), {table},
                   [ids = std::vector<int>(ids.begin(), ids.end())](Node& n) {
                     Tensor* g = grad_of(n, 0);
                     if (!g) return;
                     for (std::size_t i = 0; i < ids.size(); ++i) {
                       auto dst = g->row(static_cast<std::size_t>(ids[i]));
                       auto src = n.grad.row(i);
                       for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                     }
                   });
}

Var log_softmax(const Var& x, std::size_t axis) {
  const Tensor& in = x->value;
  std::size_t outer, len, stride;
  if (in.rank() == 1 && axis == 0) {
    outer = 1, len = in.size(), stride = 1;
  } else if (in.rank() == 2 && axis == 1) {
    outer = in.dim(0), len = in.dim(1), stride = 1;
  } else if (in.rank() == 2 && axis == 0) {
    outer = in.dim(1), len = in.dim(0), stride = in.dim(1);
  } else {
    throw ShapeError("log_softmax axis " + std::to_string(axis) +
                     " invalid for shape " + in.shape_str());
  }
  // Slice s starts at s * len * stride for rows and at s for columns.
  const std::size_t slice_step = stride == 1 ? len : 1;
  Tensor out(in.shape());
  for (std::size_t s = 0; s < outer; ++s) {
    const std::size_t base = s * slice_step;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, in[base + i * stride]);
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += std::exp(in[base + i * stride] - mx);
    const double lse = mx + std::log(acc);
    for (std::size_t i = 0; i < len; ++i) {
      out[base + i * stride] = in[base + i * stride] - lse;
    }
  }
  return make_node(out, {x}, [out, outer, len, stride, slice_step](Node& n) {
    Tensor* g = grad_of(n, 0);
    if (!g) return;
    for (std::size_t s = 0; s < outer; ++s) {
      const std::size_t base = s * slice_step;
      double gsum = 0.0;
      for (std::size_t i = 0; i < len; ++i) gsum += n.grad[base + i * stride];
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t at = base + i * stride;
        (*g)[at] += n.grad[at] - std::exp(out[at]) * gsum;
      }
    }
  });
}

Var upsample_rows(const Var& x, std::size_t factor) {
  require_matrix(x->value, "upsample_rows");
  if (factor == 0) throw ShapeError("upsample factor must be at least 1");
  const std::size_t rows = x->value.rows(), c = x->value.cols();
  Tensor out = Tensor::matrix(rows * factor, c);
  for (std::size_t i = 0; i < rows * factor; ++i) {
    auto src = x->value.row(i / factor);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return make_node(std::move(out), {x}, [factor](Node& n) {
    Tensor* g = grad_of(n, 0);
    if (!g) return;
    for (std::size_t i = 0; i < n.grad.rows(); ++i) {
      auto dst = g->row(i / factor);
      auto src = n.grad.row(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  });
}

Var slice_rows(const Var& x, std::size_t begin, std::size_t count) {
  require_matrix(x->value, "slice_rows");
  if (begin + count > x->value.rows()) {
    throw ShapeError("slice_rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " +
                     x->value.shape_str());
  }
  const std::size_t c = x->value.cols();
  Tensor out = Tensor::matrix(count, c);
  std::copy_n(x->value.raw() + begin * c, count * c, out.raw());
  return make_node(std::move(out), {x}, [begin](Node& n) {
    Tensor* g = grad_of(n, 0);
    if (!g) return;
    double* dst = g->raw() + begin * n.grad.cols();
    for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += n.grad[i];
  });
}

Var replace_rows(const Var& base, const Var& table,
                 std::span<const std::size_t> positions,
                 std::span<const int> ids) {
  require_matrix(base->value, "replace_rows");
  require_matrix(table->value, "replace_rows");
  if (positions.size() != ids.size()) {
    throw ShapeError("replace_rows needs one id per position");
  }
  if (base->value.cols() != table->value.cols()) {
    throw ShapeError("replace_rows width mismatch: " + base->value.shape_str() +
                     " vs " + table->value.shape_str());
  }
  Tensor out = base->value;
  std::vector<char> replaced(out.rows(), 0);
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (positions[j] >= out.rows() || ids[j] < 0 ||
        static_cast<std::size_t>(ids[j]) >= table->value.rows()) {
      throw RangeError("replace_rows position or id out of range");
    }
    if (replaced[positions[j]]) throw RangeError("replace_rows positions repeat");
    replaced[positions[j]] = 1;
    auto src = table->value.row(static_cast<std::size_t>(ids[j]));
    std::copy(src.begin(), src.end(), out.row(positions[j]).begin());
  }
  return make_node(
      std::move(out), {base, table},
      [replaced, pos = std::vector<std::size_t>(positions.begin(), positions.end()),
       idv = std::vector<int>(ids.begin(), ids.end())](Node& n) {
        if (Tensor* gb = grad_of(n, 0)) {
          for (std::size_t r = 0; r < n.grad.rows(); ++r) {
            if (replaced[r]) continue;
            auto dst = gb->row(r);
            auto src = n.grad.row(r);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
          }
        }
        if (Tensor* gt = grad_of(n, 1)) {
          for (std::size_t j = 0; j < pos.size(); ++j) {
            auto dst = gt->row(static_cast<std::size_t>(idv[j]));
            auto src = n.grad.row(pos[j]);
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
          }
        }
      });
}

Var dropout(const Var& x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw RangeError("dropout probability must be below 1");
  std::bernoulli_distribution keep(1.0 - p);
  Tensor mask(x->value.shape());
  const double s = 1.0 / (1.0 - p);
  for (auto& m : mask.data()) m = keep(rng) ? s : 0.0;
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_node(std::move(out), {x}, [mask = std::move(mask)](Node& n) {
    if (Tensor* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * mask[i];
    }
  });
}

Var sum(const Var& x) {
  double acc = 0.0;
  for (double v : x->value.data()) acc += v;
  return make_node(Tensor({1}, acc), {x}, [](Node& n) {
    if (Tensor* g = grad_of(n, 0)) {
      for (auto& v : g->data()) v += n.grad[0];
    }
  });
}

Var nll_loss(const Var& log_probs, std::span<const int> targets) {
  require_matrix(log_probs->value, "nll_loss");
  if (targets.size() != log_probs->value.rows()) {
    throw ShapeError("nll_loss has " + std::to_string(targets.size()) +
                     " targets for " + log_probs->value.shape_str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 ||
        static_cast<std::size_t>(targets[i]) >= log_probs->value.cols()) {
      throw RangeError("nll_loss target " + std::to_string(targets[i]) +
                       " out of range");
    }
    acc -= log_probs->value(i, static_cast<std::size_t>(targets[i]));
  }
  return make_node(
      Tensor({1}, acc), {log_probs},
      [t = std::vector<int>(targets.begin(), targets.end())](Node& n) {
        if (Tensor* g = grad_of(n, 0)) {
          for (std::size_t i = 0; i < t.size(); ++i) {
            (*g)(i, static_cast<std::size_t>(t[i])) -= n.grad[0];
          }
        }
      });
}

Var scalar_with_gradient(const Var& input, double value, Tensor gradient) {
  require_same(input->value, gradient, "scalar_with_gradient");
  return make_node(Tensor({1}, value), {input},
                   [gradient = std::move(gradient)](Node& n) {
                     if (Tensor* g = grad_of(n, 0)) {
                       for (std::size_t i = 0; i < g->size(); ++i) {
                         (*g)[i] += n.grad[0] * gradient[i];
                       }
                     }
                   });
}

}  // namespace s2ut

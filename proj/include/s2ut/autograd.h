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

#ifndef S2UT_AUTOGRAD_H_
#define S2UT_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "s2ut/tensor.h"

namespace s2ut {

// Tape-free reverse mode: every op allocates a Node that remembers its
// parents and a closure that pushes the node's gradient into them.
// backward() walks the graph in reverse topological order.
struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad();
};

using Var = std::shared_ptr<Node>;

Var constant(Tensor value);
Var leaf(Tensor value);  // requires_grad = true

// Builds an op node. Parents and the backward closure are kept only when
// gradients are enabled and at least one parent requires them.
Var make_node(Tensor value, std::vector<Var> parents,
              std::function<void(Node&)> backward_fn);

// Seeds d(root)/d(root) = 1 for a single-element root, or the given seed.
void backward(const Var& root);
void backward(const Var& root, const Tensor& seed);

bool grad_enabled();

// Disables graph construction for the guard's lifetime (inference, the
// first glancing pass). Thread-local.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Named trainable tensor. Copies share the underlying node.
class Parameter {
 public:
  Parameter(std::string name, Tensor value);

  const std::string& name() const { return name_; }
  const Var& var() const { return node_; }
  Tensor& value() { return node_->value; }
  const Tensor& value() const { return node_->value; }
  Tensor& gradient() { return node_->ensure_grad(); }
  const Tensor& gradient() const { return node_->ensure_grad(); }
  void zero_grad();

 private:
  std::string name_;
  Var node_;
};

}  // namespace s2ut

#endif  // S2UT_AUTOGRAD_H_

/*
 * Copyright 2026 The ForestViT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "forestvit/tensor.hpp"

namespace forestvit {

class Tape;

using NodeId = std::size_t;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  NodeId id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Records primitive operations in execution order. Node ids are assigned
// sequentially and every node's inputs are created before it, so reverse id
// order is a valid reverse topological order.
class Tape {
 public:
  // Called during backward() with this tape and the node being processed.
  using BackwardFn = std::function<void(Tape&, NodeId)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A node whose gradient is requested (a parameter or an input under test).
  Var leaf(Tensor value);
  // A node that never receives a gradient.
  Var constant(Tensor value);

  Var record(Tensor value, std::vector<NodeId> inputs, BackwardFn backward);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  bool needs_grad(NodeId id) const { return nodes_[id].needs_grad; }
  const std::vector<NodeId>& inputs(NodeId id) const { return nodes_[id].inputs; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient buffer of a node during backward(); valid after it returns.
  std::span<double> grad_buffer(NodeId id);
  std::span<const double> grad(Var v) const;

  // Reverse sweep from a one-element loss node. Fills the grad field of every
  // node that depends on a leaf. Throws ContractError for a non-scalar loss.
  void backward(Var loss);

  // When disabled, record() drops backward closures; useful for inference.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  struct Node {
    Tensor value;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
};

// Differentiable primitives. All operands must live on the same tape.
namespace ad {

Var matmul(Var a, Var b);
// a * b^T
Var matmul_transposed(Var a, Var b);
Var add(Var a, Var b);
// x[m x n] + bias[n] broadcast over rows.
Var add_bias(Var x, Var bias);
Var scale(Var x, double factor);
Var gelu(Var x);
Var relu(Var x);
Var sigmoid(Var x);
// Softmax over the last axis of each row.
Var softmax(Var z);
Var layer_norm(Var x, Var gamma, Var beta, double eps);
// Scalar -log softmax(logits)[label].
Var cross_entropy(Var logits, std::size_t label);
// Columns [begin, end) of a matrix.
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var concat_cols(std::span<const Var> parts);
// Stacks matrices (or row vectors) vertically.
Var concat_rows(std::span<const Var> parts);
// Row r as a 1 x n matrix.
Var row(Var x, std::size_t r);
// Mean of one-element nodes.
Var mean(std::span<const Var> scalars);
// Sum of all entries, as a scalar.
Var sum(Var x);

}  // namespace ad

}  // namespace forestvit

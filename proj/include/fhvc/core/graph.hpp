// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhvc/core/tensor.hpp"

namespace fhvc {

/// Handle to a node of a Graph. Only meaningful for the graph that made it.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const noexcept { return id != UINT32_MAX; }
  friend bool operator==(Var, Var) = default;
};

enum class OpKind : std::uint8_t {
  input,
  parameter,
  add,
  sub,
  mul,
  scale,
  matmul,
  transpose,
  concat,
  slice,
  sum,
  mean,
  exp,
  log,
  tanh,
  sigmoid,
  square,
  add_bias,
  mul_row,
  clamp,
  sum_axis,
  logsumexp_rows,
};

const char* op_name(OpKind kind);

class GraphError : public std::runtime_error {
 public:
  GraphError(std::uint32_t node, OpKind op, const std::string& detail);
  std::uint32_t node() const noexcept { return node_; }
  OpKind op() const noexcept { return op_; }

 private:
  std::uint32_t node_;
  OpKind op_;
};

using Gradients = std::map<std::string, Tensor>;

/// Tape of rank-2 tensor operations with reverse-mode differentiation.
///
/// Shapes are checked as nodes are recorded. Forward values are computed
/// lazily by value()/evaluate() and memoized, so each node runs once until a
/// leaf is rebound with bind(). Parameters are named leaves; gradient()
/// reports d(output)/d(parameter) for every one of them.
class Graph {
 public:
  Var input(Tensor value);
  Var parameter(std::string name, Tensor value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  // Elementwise product.
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  // axis 0 stacks rows, axis 1 stacks columns.
  Var concat(std::span<const Var> parts, int axis);
  Var slice(Var a, int axis, std::size_t begin, std::size_t end);
  // Full reductions to a 1×1 scalar.
  Var sum(Var a);
  Var mean(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var square(Var a);
  // a (r×c) plus bias (1×c) broadcast over rows.
  Var add_bias(Var a, Var bias);
  // a (r×c) times row (1×c) broadcast over rows.
  Var mul_row(Var a, Var row);
  // Gradient passes only where lo < a < hi.
  Var clamp(Var a, double lo, double hi);
  // axis 0 → 1×c column sums, axis 1 → r×1 row sums.
  Var sum_axis(Var a, int axis);
  // r×1 stable log Σ_c exp(a_rc).
  Var logsumexp_rows(Var a);

  void bind(Var leaf, Tensor value);

  const Tensor& value(Var v);
  std::vector<Tensor> evaluate(std::span<const Var> outputs);
  Gradients gradient(Var scalar_output);

  const Shape& shape(Var v) const;
  std::size_t rows(Var v) const { return shape(v)[0]; }
  std::size_t cols(Var v) const { return shape(v)[1]; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const std::map<std::string, Var>& parameters() const noexcept { return params_; }
  Var parameter_var(const std::string& name) const;

 private:
  struct Node {
    OpKind op;
    std::vector<std::uint32_t> inputs;
    Shape shape;
    double a = 0.0;
    double b = 0.0;
    std::size_t i0 = 0;
    std::size_t i1 = 0;
    int axis = 0;
    bool needs_grad = false;
    bool computed = false;
    Tensor value;
  };

  Var push(Node node);
  Node make(OpKind op, std::initializer_list<Var> inputs);
  const Node& node(Var v) const;
  void check_var(Var v, OpKind op) const;
  void compute(std::uint32_t id);
  void backward_node(std::uint32_t id, std::vector<Tensor>& adj);

  std::vector<Node> nodes_;
  std::map<std::string, Var> params_;
};

std::vector<Tensor> evaluate(Graph& graph, std::span<const Var> outputs);
Gradients gradient(Graph& graph, Var scalar_output);

}  // namespace fhvc

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

#include "fhvc/core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fhvc/core/kernels.hpp"

namespace fhvc {

namespace {

Tensor as_matrix(Tensor t) {
  if (t.rank() == 2) return t;
  if (t.rank() == 1) {
    const std::size_t n = t.size();
    return Tensor({1, n}, std::vector<double>(t.values()));
  }
  if (t.rank() == 0) return Tensor({1, 1}, std::vector<double>(t.values()));
  throw ShapeError("graph leaves must have rank <= 2, got " + shape_string(t.shape()));
}

void accumulate(Tensor& dst, const Shape& shape) {
  if (dst.empty() && shape_size(shape) != 0) dst = Tensor(shape);
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::input: return "input";
    case OpKind::parameter: return "parameter";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::matmul: return "matmul";
    case OpKind::transpose: return "transpose";
    case OpKind::concat: return "concat";
    case OpKind::slice: return "slice";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::square: return "square";
    case OpKind::add_bias: return "add_bias";
    case OpKind::mul_row: return "mul_row";
    case OpKind::clamp: return "clamp";
    case OpKind::sum_axis: return "sum_axis";
    case OpKind::logsumexp_rows: return "logsumexp_rows";
  }
  return "?";
}

GraphError::GraphError(std::uint32_t node, OpKind op, const std::string& detail)
    : std::runtime_error("node " + std::to_string(node) + " (" + op_name(op) + "): " + detail),
      node_(node),
      op_(op) {}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw GraphError(v.id, OpKind::input, "reference to a node that does not exist");
  }
  return nodes_[v.id];
}

void Graph::check_var(Var v, OpKind op) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw GraphError(static_cast<std::uint32_t>(nodes_.size()), op,
                     "input refers to unknown node " + std::to_string(v.id));
  }
}

Graph::Node Graph::make(OpKind op, std::initializer_list<Var> inputs) {
  Node n;
  n.op = op;
  for (Var v : inputs) {
    check_var(v, op);
    n.inputs.push_back(v.id);
    n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
  }
  return n;
}

const Shape& Graph::shape(Var v) const { return node(v).shape; }

Var Graph::parameter_var(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("graph has no parameter '" + name + "'");
  return it->second;
}

Var Graph::input(Tensor value) {
  Node n;
  n.op = OpKind::input;
  n.value = as_matrix(std::move(value));
  n.shape = n.value.shape();
  n.computed = true;
  return push(std::move(n));
}

Var Graph::parameter(std::string name, Tensor value) {
  if (params_.count(name)) {
    throw GraphError(static_cast<std::uint32_t>(nodes_.size()), OpKind::parameter,
                     "duplicate parameter '" + name + "'");
  }
  Node n;
  n.op = OpKind::parameter;
  n.value = as_matrix(std::move(value));
  n.shape = n.value.shape();
  n.computed = true;
  n.needs_grad = true;
  Var v = push(std::move(n));
  params_.emplace(std::move(name), v);
  return v;
}

#define FHVC_NEXT_ID static_cast<std::uint32_t>(nodes_.size())

namespace {
std::string dims(const Shape& s) { return shape_string(s); }
}  // namespace

Var Graph::add(Var a, Var b) {
  Node n = make(OpKind::add, {a, b});
  if (shape(a) != shape(b)) {
    throw GraphError(FHVC_NEXT_ID, OpKind::add, "shape mismatch " + dims(shape(a)) + " vs " + dims(shape(b)));
  }
  n.shape = shape(a);
  return push(std::move(n));
}

Var Graph::sub(Var a, Var b) {
  Node n = make(OpKind::sub, {a, b});
  if (shape(a) != shape(b)) {
    throw GraphError(FHVC_NEXT_ID, OpKind::sub, "shape mismatch " + dims(shape(a)) + " vs " + dims(shape(b)));
  }
  n.shape = shape(a);
  return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
  Node n = make(OpKind::mul, {a, b});
  if (shape(a) != shape(b)) {
    throw GraphError(FHVC_NEXT_ID, OpKind::mul, "shape mismatch " + dims(shape(a)) + " vs " + dims(shape(b)));
  }
  n.shape = shape(a);
  return push(std::move(n));
}

Var Graph::scale(Var a, double factor) {
  Node n = make(OpKind::scale, {a});
  n.shape = shape(a);
  n.a = factor;
  return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
  Node n = make(OpKind::matmul, {a, b});
  if (cols(a) != rows(b)) {
    throw GraphError(FHVC_NEXT_ID, OpKind::matmul,
                     "inner dimensions differ: " + dims(shape(a)) + " x " + dims(shape(b)));
  }
  n.shape = {rows(a), cols(b)};
  return push(std::move(n));
}

Var Graph::transpose(Var a) {
  Node n = make(OpKind::transpose, {a});
  n.shape = {cols(a), rows(a)};
  return push(std::move(n));
}

Var Graph::concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw GraphError(FHVC_NEXT_ID, OpKind::concat, "no inputs");
  if (axis != 0 && axis != 1) throw GraphError(FHVC_NEXT_ID, OpKind::concat, "axis must be 0 or 1");
  Node n;
  n.op = OpKind::concat;
  n.axis = axis;
  std::size_t total = 0;
  for (Var v : parts) {
    check_var(v, OpKind::concat);
    const Shape& s = shape(v);
    const Shape& first = shape(parts[0]);
    if ((axis == 0 && s[1] != first[1]) || (axis == 1 && s[0] != first[0])) {
      throw GraphError(FHVC_NEXT_ID, OpKind::concat,
                       "incompatible part " + dims(s) + " vs " + dims(first));
    }
    total += s[axis];
    n.inputs.push_back(v.id);
    n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
  }
  n.shape = shape(parts[0]);
  n.shape[axis] = total;
  return push(std::move(n));
}

Var Graph::slice(Var a, int axis, std::size_t begin, std::size_t end) {
  Node n = make(OpKind::slice, {a});
  if (axis != 0 && axis != 1) throw GraphError(FHVC_NEXT_ID, OpKind::slice, "axis must be 0 or 1");
  if (begin >= end || end > shape(a)[axis]) {
    throw GraphError(FHVC_NEXT_ID, OpKind::slice,
                     "range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of bounds for " + dims(shape(a)));
  }
  n.axis = axis;
  n.i0 = begin;
  n.i1 = end;
  n.shape = shape(a);
  n.shape[axis] = end - begin;
  return push(std::move(n));
}

Var Graph::sum(Var a) {
  Node n = make(OpKind::sum, {a});
  n.shape = {1, 1};
  return push(std::move(n));
}

Var Graph::mean(Var a) {
  Node n = make(OpKind::mean, {a});
  if (shape_size(shape(a)) == 0) throw GraphError(FHVC_NEXT_ID, OpKind::mean, "empty input");
  n.shape = {1, 1};
  return push(std::move(n));
}

#define FHVC_UNARY(fn, kind)         \
  Var Graph::fn(Var a) {             \
    Node n = make(OpKind::kind, {a}); \
    n.shape = shape(a);              \
    return push(std::move(n));       \
  }

FHVC_UNARY(exp, exp)
FHVC_UNARY(log, log)
FHVC_UNARY(tanh, tanh)
FHVC_UNARY(sigmoid, sigmoid)
FHVC_UNARY(square, square)
#undef FHVC_UNARY

Var Graph::add_bias(Var a, Var bias) {
  Node n = make(OpKind::add_bias, {a, bias});
  if (rows(bias) != 1 || cols(bias) != cols(a)) {
    throw GraphError(FHVC_NEXT_ID, OpKind::add_bias,
                     "bias " + dims(shape(bias)) + " does not broadcast over " + dims(shape(a)));
  }
  n.shape = shape(a);
  return push(std::move(n));
}

Var Graph::mul_row(Var a, Var row) {
  Node n = make(OpKind::mul_row, {a, row});
  if (rows(row) != 1 || cols(row) != cols(a)) {
    throw GraphError(FHVC_NEXT_ID, OpKind::mul_row,
                     "row " + dims(shape(row)) + " does not broadcast over " + dims(shape(a)));
  }
  n.shape = shape(a);
  return push(std::move(n));
}

Var Graph::clamp(Var a, double lo, double hi) {
  Node n = make(OpKind::clamp, {a});
  if (!(lo < hi)) throw GraphError(FHVC_NEXT_ID, OpKind::clamp, "empty interval");
  n.a = lo;
  n.b = hi;
  n.shape = shape(a);
  return push(std::move(n));
}

Var Graph::sum_axis(Var a, int axis) {
  Node n = make(OpKind::sum_axis, {a});
  if (axis != 0 && axis != 1) throw GraphError(FHVC_NEXT_ID, OpKind::sum_axis, "axis must be 0 or 1");
  n.axis = axis;
  n.shape = axis == 0 ? Shape{1, cols(a)} : Shape{rows(a), 1};
  return push(std::move(n));
}

Var Graph::logsumexp_rows(Var a) {
  Node n = make(OpKind::logsumexp_rows, {a});
  if (cols(a) == 0) throw GraphError(FHVC_NEXT_ID, OpKind::logsumexp_rows, "no columns");
  n.shape = {rows(a), 1};
  return push(std::move(n));
}

#undef FHVC_NEXT_ID

void Graph::bind(Var leaf, Tensor value) {
  const Node& n = node(leaf);
  if (n.op != OpKind::input && n.op != OpKind::parameter) {
    throw GraphError(leaf.id, n.op, "bind() target is not a leaf");
  }
  Tensor m = as_matrix(std::move(value));
  if (m.shape() != n.shape) {
    throw GraphError(leaf.id, n.op,
                     "bound value " + dims(m.shape()) + " does not match leaf " + dims(n.shape));
  }
  nodes_[leaf.id].value = std::move(m);
  for (Node& other : nodes_) {
    if (other.op != OpKind::input && other.op != OpKind::parameter) {
      other.computed = false;
      other.value = Tensor();
    }
  }
}

void Graph::compute(std::uint32_t id) {
  Node& n = nodes_[id];
  const auto& k = kernels::active();
  auto in = [&](std::size_t i) -> const Tensor& { return nodes_[n.inputs[i]].value; };
  Tensor out(n.shape);
  double* y = out.data().data();
  const std::size_t size = out.size();

  switch (n.op) {
    case OpKind::input:
    case OpKind::parameter:
      return;
    case OpKind::add:
      k.add(size, in(0).data().data(), in(1).data().data(), y);
      break;
    case OpKind::sub:
      k.sub(size, in(0).data().data(), in(1).data().data(), y);
      break;
    case OpKind::mul:
      k.mul(size, in(0).data().data(), in(1).data().data(), y);
      break;
    case OpKind::scale: {
      const double* x = in(0).data().data();
      for (std::size_t i = 0; i < size; ++i) y[i] = n.a * x[i];
      break;
    }
    case OpKind::matmul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      k.gemm(kernels::Trans::no, kernels::Trans::no, a.rows(), b.cols(), a.cols(), a.data().data(),
             b.data().data(), y, false);
      break;
    }
    case OpKind::transpose: {
      const Tensor& a = in(0);
      const std::size_t r = a.rows(), c = a.cols();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) y[j * r + i] = a(i, j);
      break;
    }
    case OpKind::concat: {
      const std::size_t out_cols = n.shape[1];
      std::size_t offset = 0;
      for (std::size_t p = 0; p < n.inputs.size(); ++p) {
        const Tensor& part = in(p);
        const std::size_t pr = part.rows(), pc = part.cols();
        if (n.axis == 0) {
          std::copy(part.data().begin(), part.data().end(), y + offset * out_cols);
          offset += pr;
        } else {
          for (std::size_t r = 0; r < pr; ++r)
            std::copy_n(part.data().data() + r * pc, pc, y + r * out_cols + offset);
          offset += pc;
        }
      }
      break;
    }
    case OpKind::slice: {
      const Tensor& a = in(0);
      const std::size_t ac = a.cols();
      if (n.axis == 0) {
        std::copy_n(a.data().data() + n.i0 * ac, size, y);
      } else {
        const std::size_t w = n.i1 - n.i0;
        for (std::size_t r = 0; r < a.rows(); ++r) std::copy_n(a.data().data() + r * ac + n.i0, w, y + r * w);
      }
      break;
    }
    case OpKind::sum:
    case OpKind::mean: {
      double s = 0.0;
      for (double v : in(0).data()) s += v;
      y[0] = n.op == OpKind::mean ? s / static_cast<double>(in(0).size()) : s;
      break;
    }
    case OpKind::exp: {
      const double* x = in(0).data().data();
      for (std::size_t i = 0; i < size; ++i) y[i] = std::exp(x[i]);
      break;
    }
    case OpKind::log: {
      const double* x = in(0).data().data();
      for (std::size_t i = 0; i < size; ++i) y[i] = std::log(x[i]);
      break;
    }
    case OpKind::tanh: {
      const double* x = in(0).data().data();
      for (std::size_t i = 0; i < size; ++i) y[i] = std::tanh(x[i]);
      break;
    }
    case OpKind::sigmoid: {
      const double* x = in(0).data().data();
      for (std::size_t i = 0; i < size; ++i) {
        // Split by sign so exp never overflows.
        y[i] = x[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-x[i])) : std::exp(x[i]) / (1.0 + std::exp(x[i]));
      }
      break;
    }
    case OpKind::square: {
      const double* x = in(0).data().data();
      k.mul(size, x, x, y);
      break;
    }
    case OpKind::add_bias: {
      const Tensor& a = in(0);
      const double* bias = in(1).data().data();
      const std::size_t c = a.cols();
      for (std::size_t r = 0; r < a.rows(); ++r) k.add(c, a.data().data() + r * c, bias, y + r * c);
      break;
    }
    case OpKind::mul_row: {
      const Tensor& a = in(0);
      const double* row = in(1).data().data();
      const std::size_t c = a.cols();
      for (std::size_t r = 0; r < a.rows(); ++r) k.mul(c, a.data().data() + r * c, row, y + r * c);
      break;
    }
    case OpKind::clamp: {
      const double* x = in(0).data().data();
      for (std::size_t i = 0; i < size; ++i) y[i] = std::clamp(x[i], n.a, n.b);
      break;
    }
    case OpKind::sum_axis: {
      const Tensor& a = in(0);
      const std::size_t r = a.rows(), c = a.cols();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) y[n.axis == 0 ? j : i] += a(i, j);
      break;
    }
    case OpKind::logsumexp_rows: {
      const Tensor& a = in(0);
      const std::size_t c = a.cols();
      for (std::size_t i = 0; i < a.rows(); ++i) {
        auto row = a.row_span(i);
        const double m = *std::max_element(row.begin(), row.end());
        double s = 0.0;
        for (double v : row) s += std::exp(v - m);
        y[i] = m + std::log(s);
        (void)c;
      }
      break;
    }
  }
  n.value = std::move(out);
  n.computed = true;
}

const Tensor& Graph::value(Var v) {
  node(v);
  // Inputs always precede their consumers, so a forward sweep suffices.
  for (std::uint32_t id = 0; id <= v.id; ++id) {
    if (!nodes_[id].computed) compute(id);
  }
  return nodes_[v.id].value;
}

std::vector<Tensor> Graph::evaluate(std::span<const Var> outputs) {
  std::vector<Tensor> out;
  out.reserve(outputs.size());
  for (Var v : outputs) out.push_back(value(v));
  return out;
}

void Graph::backward_node(std::uint32_t id, std::vector<Tensor>& adj) {
  const Node& n = nodes_[id];
  const Tensor& g = adj[id];
  const auto& k = kernels::active();
  const double* gd = g.data().data();
  const std::size_t size = g.size();

  auto target = [&](std::size_t i) -> Tensor* {
    const std::uint32_t src = n.inputs[i];
    if (!nodes_[src].needs_grad) return nullptr;
    accumulate(adj[src], nodes_[src].shape);
    return &adj[src];
  };
  auto in = [&](std::size_t i) -> const Tensor& { return nodes_[n.inputs[i]].value; };

  switch (n.op) {
    case OpKind::input:
    case OpKind::parameter:
      return;
    case OpKind::add:
      for (std::size_t i = 0; i < 2; ++i)
        if (Tensor* t = target(i)) k.axpy(size, 1.0, gd, t->data().data());
      return;
    case OpKind::sub:
      if (Tensor* t = target(0)) k.axpy(size, 1.0, gd, t->data().data());
      if (Tensor* t = target(1)) k.axpy(size, -1.0, gd, t->data().data());
      return;
    case OpKind::mul:
      if (Tensor* t = target(0)) k.mul_acc(size, gd, in(1).data().data(), t->data().data());
      if (Tensor* t = target(1)) k.mul_acc(size, gd, in(0).data().data(), t->data().data());
      return;
    case OpKind::scale:
      if (Tensor* t = target(0)) k.axpy(size, n.a, gd, t->data().data());
      return;
    case OpKind::matmul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      const std::size_t m = a.rows(), inner = a.cols(), cols = b.cols();
      // dA += G·Bᵀ, dB += Aᵀ·G
      if (Tensor* t = target(0)) {
        k.gemm(kernels::Trans::no, kernels::Trans::yes, m, inner, cols, gd, b.data().data(),
               t->data().data(), true);
      }
      if (Tensor* t = target(1)) {
        k.gemm(kernels::Trans::yes, kernels::Trans::no, inner, cols, m, a.data().data(), gd,
               t->data().data(), true);
      }
      return;
    }
    case OpKind::transpose:
      if (Tensor* t = target(0)) {
        const std::size_t r = n.shape[0], c = n.shape[1];
        double* d = t->data().data();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) d[j * r + i] += gd[i * c + j];
      }
      return;
    case OpKind::concat: {
      const std::size_t out_cols = n.shape[1];
      std::size_t offset = 0;
      for (std::size_t p = 0; p < n.inputs.size(); ++p) {
        const Shape& ps = nodes_[n.inputs[p]].shape;
        if (Tensor* t = target(p)) {
          double* d = t->data().data();
          if (n.axis == 0) {
            k.axpy(ps[0] * ps[1], 1.0, gd + offset * out_cols, d);
          } else {
            for (std::size_t r = 0; r < ps[0]; ++r) k.axpy(ps[1], 1.0, gd + r * out_cols + offset, d + r * ps[1]);
          }
        }
        offset += ps[n.axis];
      }
      return;
    }
    case OpKind::slice:
      if (Tensor* t = target(0)) {
        const std::size_t ac = t->cols();
        double* d = t->data().data();
        if (n.axis == 0) {
          k.axpy(size, 1.0, gd, d + n.i0 * ac);
        } else {
          const std::size_t w = n.i1 - n.i0;
          for (std::size_t r = 0; r < n.shape[0]; ++r) k.axpy(w, 1.0, gd + r * w, d + r * ac + n.i0);
        }
      }
      return;
    case OpKind::sum:
    case OpKind::mean:
      if (Tensor* t = target(0)) {
        const double v = n.op == OpKind::mean ? gd[0] / static_cast<double>(t->size()) : gd[0];
        for (double& d : t->data()) d += v;
      }
      return;
    case OpKind::exp:
      if (Tensor* t = target(0)) k.mul_acc(size, gd, n.value.data().data(), t->data().data());
      return;
    case OpKind::log:
      if (Tensor* t = target(0)) {
        const double* x = in(0).data().data();
        double* d = t->data().data();
        for (std::size_t i = 0; i < size; ++i) d[i] += gd[i] / x[i];
      }
      return;
    case OpKind::tanh:
      if (Tensor* t = target(0)) {
        const double* yv = n.value.data().data();
        double* d = t->data().data();
        for (std::size_t i = 0; i < size; ++i) d[i] += gd[i] * (1.0 - yv[i] * yv[i]);
      }
      return;
    case OpKind::sigmoid:
      if (Tensor* t = target(0)) {
        const double* yv = n.value.data().data();
        double* d = t->data().data();
        for (std::size_t i = 0; i < size; ++i) d[i] += gd[i] * yv[i] * (1.0 - yv[i]);
      }
      return;
    case OpKind::square:
      if (Tensor* t = target(0)) {
        const double* x = in(0).data().data();
        double* d = t->data().data();
        for (std::size_t i = 0; i < size; ++i) d[i] += 2.0 * gd[i] * x[i];
      }
      return;
    case OpKind::add_bias: {
      const std::size_t r = n.shape[0], c = n.shape[1];
      if (Tensor* t = target(0)) k.axpy(size, 1.0, gd, t->data().data());
      if (Tensor* t = target(1)) {
        double* d = t->data().data();
        for (std::size_t i = 0; i < r; ++i) k.axpy(c, 1.0, gd + i * c, d);
      }
      return;
    }
    case OpKind::mul_row: {
      const std::size_t r = n.shape[0], c = n.shape[1];
      const double* a = in(0).data().data();
      const double* row = in(1).data().data();
      if (Tensor* t = target(0)) {
        double* d = t->data().data();
        for (std::size_t i = 0; i < r; ++i) k.mul_acc(c, gd + i * c, row, d + i * c);
      }
      if (Tensor* t = target(1)) {
        double* d = t->data().data();
        for (std::size_t i = 0; i < r; ++i) k.mul_acc(c, gd + i * c, a + i * c, d);
      }
      return;
    }
    case OpKind::clamp:
      if (Tensor* t = target(0)) {
        const double* x = in(0).data().data();
        double* d = t->data().data();
        for (std::size_t i = 0; i < size; ++i)
          if (x[i] > n.a && x[i] < n.b) d[i] += gd[i];
      }
      return;
    case OpKind::sum_axis:
      if (Tensor* t = target(0)) {
        const std::size_t r = t->rows(), c = t->cols();
        double* d = t->data().data();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) d[i * c + j] += gd[n.axis == 0 ? j : i];
      }
      return;
    case OpKind::logsumexp_rows:
      if (Tensor* t = target(0)) {
        const Tensor& a = in(0);
        const std::size_t r = a.rows(), c = a.cols();
        const double* yv = n.value.data().data();
        double* d = t->data().data();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) d[i * c + j] += gd[i] * std::exp(a(i, j) - yv[i]);
      }
      return;
  }
}

Gradients Graph::gradient(Var scalar_output) {
  const Tensor& out = value(scalar_output);
  if (out.size() != 1) {
    throw GraphError(scalar_output.id, nodes_[scalar_output.id].op,
                     "gradient() needs a scalar output, got " + dims(out.shape()));
  }
  std::vector<Tensor> adj(nodes_.size());
  if (nodes_[scalar_output.id].needs_grad) {
    adj[scalar_output.id] = Tensor::filled(1, 1, 1.0);
    for (std::uint32_t id = scalar_output.id + 1; id-- > 0;) {
      if (adj[id].empty() || !nodes_[id].needs_grad) continue;
      backward_node(id, adj);
      if (nodes_[id].op != OpKind::parameter) adj[id] = Tensor();
    }
  }
  Gradients grads;
  for (const auto& [name, v] : params_) {
    const Node& p = nodes_[v.id];
    grads.emplace(name, adj[v.id].empty() ? Tensor(p.shape) : std::move(adj[v.id]));
  }
  return grads;
}

std::vector<Tensor> evaluate(Graph& graph, std::span<const Var> outputs) {
  return graph.evaluate(outputs);
}

Gradients gradient(Graph& graph, Var scalar_output) { return graph.gradient(scalar_output); }

}  // namespace fhvc

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

#include "fhvc/core/lstm.hpp"

#include <stdexcept>

namespace fhvc {

void init_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
               std::size_t hidden, SeededRng& rng) {
  SeededRng r = rng.stream(prefix);
  params[prefix + ".wx"] = glorot_uniform(input_dim, 4 * hidden, r);
  params[prefix + ".wh"] = glorot_uniform(hidden, 4 * hidden, r);
  Tensor b = Tensor::zeros(1, 4 * hidden);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
  params[prefix + ".b"] = std::move(b);
}

LstmWeights lstm_weights(const Graph& graph, const std::string& prefix) {
  LstmWeights w;
  w.w_x = graph.parameter_var(prefix + ".wx");
  w.w_h = graph.parameter_var(prefix + ".wh");
  w.bias = graph.parameter_var(prefix + ".b");
  w.hidden = graph.cols(w.w_h) / 4;
  if (graph.rows(w.w_h) != w.hidden || graph.cols(w.bias) != 4 * w.hidden) {
    throw ShapeError("inconsistent LSTM weights under '" + prefix + "'");
  }
  return w;
}

LstmOutput lstm_forward(Graph& graph, std::span<const Var> inputs, const LstmWeights& weights,
                        LstmState initial) {
  if (inputs.empty()) throw std::invalid_argument("lstm_forward: empty input sequence");
  const std::size_t H = weights.hidden;
  const std::size_t batch = graph.rows(inputs[0]);
  if (graph.cols(inputs[0]) != graph.rows(weights.w_x)) {
    throw ShapeError("lstm_forward: input width " + std::to_string(graph.cols(inputs[0])) +
                     " does not match w_x rows " + std::to_string(graph.rows(weights.w_x)));
  }
  LstmState state = initial;
  if (!state.h.valid()) state.h = graph.input(Tensor::zeros(batch, H));
  if (!state.c.valid()) state.c = graph.input(Tensor::zeros(batch, H));

  LstmOutput out;
  out.hidden.reserve(inputs.size());
  for (Var x : inputs) {
    Var pre = graph.add_bias(graph.add(graph.matmul(x, weights.w_x), graph.matmul(state.h, weights.w_h)),
                             weights.bias);
    Var i = graph.sigmoid(graph.slice(pre, 1, 0, H));
    Var f = graph.sigmoid(graph.slice(pre, 1, H, 2 * H));
    Var g = graph.tanh(graph.slice(pre, 1, 2 * H, 3 * H));
    Var o = graph.sigmoid(graph.slice(pre, 1, 3 * H, 4 * H));
    state.c = graph.add(graph.mul(f, state.c), graph.mul(i, g));
    state.h = graph.mul(o, graph.tanh(state.c));
    out.hidden.push_back(state.h);
  }
  out.final = state;
  return out;
}

LstmSequenceResult lstm_forward(const Tensor& sequence, const Tensor& w_x, const Tensor& w_h,
                                const Tensor& bias, const Tensor* h0, const Tensor* c0) {
  if (sequence.empty() || sequence.rows() == 0) {
    throw std::invalid_argument("lstm_forward: empty input sequence");
  }
  Graph g;
  g.parameter("lstm.wx", w_x);
  g.parameter("lstm.wh", w_h);
  g.parameter("lstm.b", bias);
  const LstmWeights weights = lstm_weights(g, "lstm");
  std::vector<Var> steps;
  const std::size_t T = sequence.rows();
  for (std::size_t t = 0; t < T; ++t) steps.push_back(g.input(Tensor::row(sequence.row_span(t))));
  LstmState init;
  if (h0) init.h = g.input(*h0);
  if (c0) init.c = g.input(*c0);
  LstmOutput out = lstm_forward(g, steps, weights, init);

  LstmSequenceResult result;
  result.hidden = Tensor::zeros(T, weights.hidden);
  for (std::size_t t = 0; t < T; ++t) {
    const Tensor& h = g.value(out.hidden[t]);
    std::copy(h.data().begin(), h.data().end(), result.hidden.row_span(t).begin());
  }
  result.final_h = g.value(out.final.h);
  result.final_c = g.value(out.final.c);
  return result;
}

}  // namespace fhvc

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

#include <span>
#include <string>
#include <vector>

#include "fhvc/core/graph.hpp"
#include "fhvc/core/params.hpp"

namespace fhvc {

// Single-layer LSTM without peepholes. Gate blocks in the fused weight
// matrices are ordered input, forget, candidate, output:
//   w_x: Din×4H, w_h: H×4H, bias: 1×4H.
struct LstmWeights {
  Var w_x;
  Var w_h;
  Var bias;
  std::size_t hidden = 0;
};

struct LstmState {
  Var h;
  Var c;
};

struct LstmOutput {
  std::vector<Var> hidden;  // one B×H node per step
  LstmState final;
};

// Adds "<prefix>.wx", "<prefix>.wh", "<prefix>.b" to `params`; forget-gate
// bias starts at 1.
void init_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
               std::size_t hidden, SeededRng& rng);

// Looks up the graph parameters registered under `prefix`.
LstmWeights lstm_weights(const Graph& graph, const std::string& prefix);

// Runs the recurrence over `inputs` (each B×Din). Invalid state handles mean
// a zero initial state.
LstmOutput lstm_forward(Graph& graph, std::span<const Var> inputs, const LstmWeights& weights,
                        LstmState initial = {});

struct LstmSequenceResult {
  Tensor hidden;  // T×H
  Tensor final_h;
  Tensor final_c;
};

// Tensor-level convenience for one sequence (T×Din). Throws on T == 0.
LstmSequenceResult lstm_forward(const Tensor& sequence, const Tensor& w_x, const Tensor& w_h,
                                const Tensor& bias, const Tensor* h0 = nullptr,
                                const Tensor* c0 = nullptr);

}  // namespace fhvc

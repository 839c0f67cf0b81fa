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

#include "fhvc/core/graph.hpp"
#include "fhvc/core/params.hpp"

namespace fhvc {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.95;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const ParameterSet& params, AdamConfig config = {});

/// One bias-corrected Adam update. `grads` must hold exactly the keys of
/// `params`; otherwise std::invalid_argument and nothing is modified.
void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state);

double global_norm(const Gradients& grads);
// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(Gradients& grads, double max_norm);

}  // namespace fhvc

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

#include <map>
#include <string>

#include "fhvc/core/graph.hpp"
#include "fhvc/core/rng.hpp"
#include "fhvc/core/tensor.hpp"

namespace fhvc {

/// Named parameter tensors. Ordered so iteration (and serialization) is
/// deterministic.
using ParameterSet = std::map<std::string, Tensor>;

// Uniform in [-a, a] with a = sqrt(6 / (rows + cols)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, SeededRng& rng);

// Registers every tensor of `params` as a graph parameter.
void bind_parameters(Graph& graph, const ParameterSet& params);

const Tensor& require_param(const ParameterSet& params, const std::string& name);

}  // namespace fhvc

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

#include "fhvc/core/params.hpp"

#include <cmath>
#include <stdexcept>

namespace fhvc {

Tensor glorot_uniform(std::size_t rows, std::size_t cols, SeededRng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t({rows, cols});
  for (double& v : t.data()) v = (2.0 * rng.uniform() - 1.0) * a;
  return t;
}

void bind_parameters(Graph& graph, const ParameterSet& params) {
  for (const auto& [name, value] : params) graph.parameter(name, value);
}

const Tensor& require_param(const ParameterSet& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw std::out_of_range("missing parameter '" + name + "'");
  return it->second;
}

}  // namespace fhvc

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

// Central finite-difference oracle used by the gradient tests. Works by
// rebinding leaves of an already-built graph, so the forward path is the one
// under test but the derivative comes from function values only.

#include <algorithm>
#include <cmath>
#include <string>

#include "fhvc/core/graph.hpp"

namespace fhvc::testing {

struct GradCheck {
  std::string parameter;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
};

inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline Tensor numeric_gradient(Graph& g, Var output, Var leaf, double h = 1e-4) {
  Tensor base = g.value(leaf);
  Tensor grad(base.shape());
  for (std::size_t i = 0; i < base.size(); ++i) {
    Tensor plus = base;
    plus[i] += h;
    g.bind(leaf, plus);
    const double fp = g.value(output)[0];
    Tensor minus = base;
    minus[i] -= h;
    g.bind(leaf, minus);
    const double fm = g.value(output)[0];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  g.bind(leaf, base);
  return grad;
}

// Compares gradient() against central differences for every parameter.
inline std::vector<GradCheck> check_all_parameters(Graph& g, Var output, double h = 1e-4) {
  const Gradients analytic = g.gradient(output);
  std::vector<GradCheck> out;
  for (const auto& [name, var] : g.parameters()) {
    const Tensor numeric = numeric_gradient(g, output, var, h);
    const Tensor& a = analytic.at(name);
    GradCheck c{name, 0.0, 0.0, a.size()};
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.max_rel_error = std::max(c.max_rel_error, rel_error(a[i], numeric[i]));
      c.max_abs_error = std::max(c.max_abs_error, std::abs(a[i] - numeric[i]));
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace fhvc::testing

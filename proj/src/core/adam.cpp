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

#include "fhvc/core/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace fhvc {

AdamState make_adam_state(const ParameterSet& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const auto& [name, p] : params) {
    s.first_moment.emplace(name, Tensor(p.shape()));
    s.second_moment.emplace(name, Tensor(p.shape()));
  }
  return s;
}

void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state) {
  for (const auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw std::invalid_argument("adam_step: missing gradient for '" + name + "'");
    if (it->second.size() != p.size()) {
      throw std::invalid_argument("adam_step: gradient for '" + name + "' has shape " +
                                  shape_string(it->second.shape()) + ", parameter " +
                                  shape_string(p.shape()));
    }
  }
  if (grads.size() != params.size()) {
    for (const auto& [name, g] : grads) {
      if (!params.count(name)) throw std::invalid_argument("adam_step: gradient for unknown '" + name + "'");
    }
  }
  for (const auto& [name, p] : params) {
    if (!state.first_moment.count(name)) {
      state.first_moment.emplace(name, Tensor(p.shape()));
      state.second_moment.emplace(name, Tensor(p.shape()));
    }
  }

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  for (auto& [name, p] : params) {
    const Tensor& g = grads.at(name);
    Tensor& m = state.first_moment.at(name);
    Tensor& v = state.second_moment.at(name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / corr1;
      const double vhat = v[i] / corr2;
      p[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

double global_norm(const Gradients& grads) {
  double s = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.data()) s += v * v;
  return std::sqrt(s);
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& [name, g] : grads)
      for (double& v : g.data()) v *= f;
  }
  return norm;
}

}  // namespace fhvc

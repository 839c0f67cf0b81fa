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

#include <cmath>

#include "doctest.h"
#include "fhvc/core/adam.hpp"

using namespace fhvc;

namespace {

// Straight-line scalar Adam used as the oracle.
struct ScalarAdam {
  double lr, b1, b2, eps;
  double m = 0, v = 0;
  int t = 0;
  double step(double x, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace

TEST_CASE("defaults mirror the published recipe") {
  AdamConfig c;
  CHECK(c.beta1 == 0.95);
  CHECK(c.beta2 == 0.999);
  CHECK(c.epsilon == 1e-8);
  CHECK(c.learning_rate == 1e-4);
}

TEST_CASE("zero gradients leave parameters unchanged for any step count") {
  ParameterSet p{{"w", Tensor::from_rows({{1.5, -2.0}, {0.25, 3.0}})}};
  const ParameterSet before = p;
  AdamState s = make_adam_state(p);
  for (int i = 0; i < 50; ++i) {
    Gradients zero{{"w", Tensor::zeros(2, 2)}};
    adam_step(p, zero, s);
  }
  CHECK(p == before);
  CHECK(s.step == 50);
}

TEST_CASE("first step with constant gradient matches the scalar oracle") {
  for (double g : {0.3, -4.0, 1e-3}) {
    ParameterSet p{{"x", Tensor::from_rows({{2.0}})}};
    AdamState s = make_adam_state(p);
    adam_step(p, {{"x", Tensor::from_rows({{g}})}}, s);
    ScalarAdam oracle{1e-4, 0.95, 0.999, 1e-8};
    const double expect = oracle.step(2.0, g);
    CHECK(p.at("x")[0] == doctest::Approx(expect).epsilon(1e-15));
    // Bias correction makes the first move ≈ lr·sign(g).
    CHECK(std::abs(2.0 - p.at("x")[0]) == doctest::Approx(1e-4).epsilon(1e-3));
    CHECK(s.step == 1);
  }
}

TEST_CASE("100 steps on x^2 from x=1 with lr=0.1 end near zero") {
  ParameterSet p{{"x", Tensor::from_rows({{1.0}})}};
  AdamState s = make_adam_state(p, AdamConfig{0.1, 0.95, 0.999, 1e-8});
  ScalarAdam oracle{0.1, 0.95, 0.999, 1e-8};
  double x = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double g = 2.0 * p.at("x")[0];
    adam_step(p, {{"x", Tensor::from_rows({{g}})}}, s);
    x = oracle.step(x, 2.0 * x);
  }
  CHECK(std::abs(x) < 0.1);
  CHECK(p.at("x")[0] == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("missing or extra gradient keys are rejected without side effects") {
  ParameterSet p{{"a", Tensor::zeros(1, 2)}, {"b", Tensor::zeros(1, 1)}};
  AdamState s = make_adam_state(p);
  CHECK_THROWS_AS(adam_step(p, {{"a", Tensor::zeros(1, 2)}}, s), std::invalid_argument);
  CHECK_THROWS_AS(adam_step(p, {{"a", Tensor::zeros(1, 2)}, {"b", Tensor::zeros(1, 1)}, {"c", Tensor::zeros(1, 1)}},
                            s),
                  std::invalid_argument);
  CHECK(s.step == 0);
}

TEST_CASE("global norm clipping rescales jointly") {
  Gradients g{{"a", Tensor::from_rows({{3.0}})}, {"b", Tensor::from_rows({{4.0}})}};
  const double norm = clip_global_norm(g, 1.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(g.at("a")[0] == doctest::Approx(0.6));
  CHECK(g.at("b")[0] == doctest::Approx(0.8));
  CHECK(clip_global_norm(g, 5.0) == doctest::Approx(1.0));
  CHECK(g.at("b")[0] == doctest::Approx(0.8));
}

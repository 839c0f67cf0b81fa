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
#include "fhvc/core/lstm.hpp"
#include "finite_diff.hpp"

using namespace fhvc;

namespace {
double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

TEST_CASE("all-zero weights give all-zero hidden states") {
  SeededRng rng(4);
  const Tensor seq = standard_normal({9, 3}, rng);
  const auto out = lstm_forward(seq, Tensor::zeros(3, 8), Tensor::zeros(2, 8), Tensor::zeros(1, 8));
  REQUIRE(out.hidden.shape() == Shape{9, 2});
  for (double v : out.hidden.data()) CHECK(v == 0.0);
}

TEST_CASE("one step of a one-unit cell matches the cell equations") {
  const Tensor wx = Tensor::from_rows({{0.3, -0.7, 1.1, 0.4}});
  const Tensor wh = Tensor::from_rows({{0.2, 0.5, -0.6, 0.9}});
  const Tensor b = Tensor::from_rows({{0.1, 1.0, -0.2, 0.05}});
  const Tensor h0 = Tensor::from_rows({{0.25}});
  const Tensor c0 = Tensor::from_rows({{-0.4}});
  const double x = 0.8;
  const auto out = lstm_forward(Tensor::from_rows({{x}}), wx, wh, b, &h0, &c0);

  const double i = sig(0.3 * x + 0.2 * 0.25 + 0.1);
  const double f = sig(-0.7 * x + 0.5 * 0.25 + 1.0);
  const double g = std::tanh(1.1 * x - 0.6 * 0.25 - 0.2);
  const double o = sig(0.4 * x + 0.9 * 0.25 + 0.05);
  const double c = f * -0.4 + i * g;
  const double h = o * std::tanh(c);
  CHECK(out.final_c[0] == doctest::Approx(c).epsilon(1e-14));
  CHECK(out.final_h[0] == doctest::Approx(h).epsilon(1e-14));
  CHECK(out.hidden[0] == out.final_h[0]);
}

TEST_CASE("empty sequences are rejected") {
  CHECK_THROWS_AS(lstm_forward(Tensor({0, 3}), Tensor::zeros(3, 8), Tensor::zeros(2, 8), Tensor::zeros(1, 8)),
                  std::invalid_argument);
  Graph g;
  std::vector<Var> none;
  g.parameter("l.wx", Tensor::zeros(3, 8));
  g.parameter("l.wh", Tensor::zeros(2, 8));
  g.parameter("l.b", Tensor::zeros(1, 8));
  CHECK_THROWS_AS(lstm_forward(g, none, lstm_weights(g, "l")), std::invalid_argument);
}

TEST_CASE("forget-gate bias starts at one") {
  SeededRng rng(5);
  ParameterSet p;
  init_lstm(p, "enc", 4, 3, rng);
  const Tensor& b = p.at("enc.b");
  REQUIRE(b.size() == 12);
  for (std::size_t j = 0; j < 12; ++j) CHECK(b[j] == (j >= 3 && j < 6 ? 1.0 : 0.0));
  const double a = std::sqrt(6.0 / (4 + 12));
  for (double v : p.at("enc.wx").data()) CHECK(std::abs(v) <= a);
}

TEST_CASE("gradient of sum(h_T) matches finite differences") {
  SeededRng rng(6);
  ParameterSet p;
  init_lstm(p, "cell", 3, 4, rng);
  Graph g;
  bind_parameters(g, p);
  std::vector<Var> steps;
  for (int t = 0; t < 6; ++t) steps.push_back(g.input(standard_normal({2, 3}, rng)));
  const auto out = lstm_forward(g, steps, lstm_weights(g, "cell"));
  Var loss = g.sum(out.final.h);
  for (const auto& c : testing::check_all_parameters(g, loss)) {
    CAPTURE(c.parameter);
    CHECK(c.max_rel_error < 1e-3);
  }
}

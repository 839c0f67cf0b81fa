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
#include "fhvc/core/rng.hpp"

using namespace fhvc;

TEST_CASE("same seed gives identical tensors") {
  SeededRng a(42), b(42);
  CHECK(standard_normal({4, 5}, a) == standard_normal({4, 5}, b));
}

TEST_CASE("normal draws have unit moments") {
  SeededRng rng(7);
  const Tensor t = standard_normal({100000}, rng);
  double mean = 0.0;
  for (double v : t.data()) mean += v;
  mean /= static_cast<double>(t.size());
  double var = 0.0;
  for (double v : t.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(t.size());
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("different stream labels give different values") {
  SeededRng root(3);
  SeededRng a = root.stream("encoder");
  SeededRng b = root.stream("decoder");
  CHECK(standard_normal({1, 8}, a) != standard_normal({1, 8}, b));
  SeededRng c = root.stream("noise", 0);
  SeededRng d = root.stream("noise", 1);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("substreams do not depend on draws made elsewhere") {
  SeededRng root(9);
  SeededRng first = root.stream("x");
  const double expect = first.normal();
  SeededRng busy = root.stream("y");
  for (int i = 0; i < 1000; ++i) busy.normal();
  SeededRng again = root.stream("x");
  CHECK(again.normal() == expect);
}

TEST_CASE("distinct streams are uncorrelated") {
  SeededRng root(21);
  SeededRng a = root.stream("alpha");
  SeededRng b = root.stream("beta");
  const int n = 10000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal(), y = b.normal();
    sa += x, sb += y, saa += x * x, sbb += y * y, sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double rho = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(rho) < 0.05);
}

TEST_CASE("uniform stays in the open unit interval and below() in range") {
  SeededRng rng(5);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    counts[rng.below(6)]++;
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS(rng.below(0));
}

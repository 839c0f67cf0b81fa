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

#include <algorithm>
#include <functional>
#include <limits>

#include "fhvc/core/tensor.hpp"

namespace fhvc::testing {

// Minimum squared-Euclidean cost over every monotone path with unit steps,
// by exhaustive enumeration. Exponential; keep inputs tiny.
inline double brute_force_dtw(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), m = b.rows();
  auto local = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < a.cols(); ++k) s += (a(i, k) - b(j, k)) * (a(i, k) - b(j, k));
    return s;
  };
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += local(i, j);
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

}  // namespace fhvc::testing

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
#include <vector>

#include "fhvc/corpus/features.hpp"

namespace fhvc::corpus {

inline constexpr double kStdFloor = 1e-6;

/// Per-dimension z-score statistics (population std, floored).
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const noexcept { return mean.size(); }
  friend bool operator==(const NormStats&, const NormStats&) = default;
};

enum class NormDirection { forward, inverse };

NormStats fit_norm_stats(std::span<const FeatureSequence> corpus);

Tensor apply_norm(const Tensor& frames, const NormStats& stats, NormDirection direction);
FeatureSequence apply_norm(const FeatureSequence& seq, const NormStats& stats, NormDirection direction);

}  // namespace fhvc::corpus

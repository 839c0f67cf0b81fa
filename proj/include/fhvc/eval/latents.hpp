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

#include "fhvc/core/tensor.hpp"
#include "fhvc/corpus/features.hpp"
#include "fhvc/model/fhvae.hpp"

namespace fhvc::eval {

/// Segment-averaged posterior means of one utterance. Z1 is inferred from
/// each segment's Z2 mean.
struct UtteranceLatents {
  std::vector<double> z2_mean;
  std::vector<double> z1_mean;
  std::size_t segments = 0;
};

UtteranceLatents utterance_latents(const corpus::FeatureSequence& utterance, const model::FhvaeModel& model);

// Per-segment posterior means, one row per segment (regular grid).
struct SegmentLatents {
  Tensor z2;  // N×d2
  Tensor z1;  // N×d1
};

SegmentLatents segment_latents(const corpus::FeatureSequence& utterance, const model::FhvaeModel& model);

// Nearest-centroid accuracy where each point is scored against centroids
// computed without it. Every label needs at least two points.
double loo_centroid_accuracy(const Tensor& points, std::span<const std::size_t> labels);

// Stacks equal-length vectors into an N×d matrix.
Tensor stack_rows(std::span<const std::vector<double>> rows);

}  // namespace fhvc::eval

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

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fhvc/corpus/features.hpp"

namespace fhvc::corpus {

inline constexpr std::size_t kDefaultSegmentFrames = 20;
inline constexpr std::size_t kDefaultSegmentHop = 20;

/// Fixed-length windows cut from one or more sequences.
struct SegmentBatch {
  std::size_t segment_frames = 0;
  std::size_t dim = 0;
  std::vector<Tensor> segments;  // each segment_frames×dim
  std::vector<std::int64_t> owner;
  std::vector<std::size_t> index_within_sequence;

  std::size_t size() const noexcept { return segments.size(); }
  bool empty() const noexcept { return segments.empty(); }
  void append(const SegmentBatch& other);
};

class EmptySegmentation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full windows at offsets 0, hop, 2·hop, …; floor((T−S)/hop)+1 of them.
// Throws EmptySegmentation when T < S.
SegmentBatch segment_sequence(const FeatureSequence& seq, std::size_t segment_frames, std::size_t hop);

// Offsets of full windows covering every frame: the regular grid plus, if
// the grid leaves a tail, one final window ending at T.
std::vector<std::size_t> covering_offsets(std::size_t num_frames, std::size_t segment_frames,
                                          std::size_t hop);

Tensor window(const Tensor& frames, std::size_t offset, std::size_t length);

}  // namespace fhvc::corpus

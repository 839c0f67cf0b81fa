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

#include "fhvc/corpus/segment.hpp"

#include <algorithm>

namespace fhvc::corpus {

void SegmentBatch::append(const SegmentBatch& other) {
  if (other.empty()) return;
  if (empty() && segments.empty()) {
    segment_frames = other.segment_frames;
    dim = other.dim;
  } else if (other.segment_frames != segment_frames || other.dim != dim) {
    throw std::invalid_argument("SegmentBatch::append: incompatible segment shapes");
  }
  segments.insert(segments.end(), other.segments.begin(), other.segments.end());
  owner.insert(owner.end(), other.owner.begin(), other.owner.end());
  index_within_sequence.insert(index_within_sequence.end(), other.index_within_sequence.begin(),
                               other.index_within_sequence.end());
}

Tensor window(const Tensor& frames, std::size_t offset, std::size_t length) {
  const std::size_t D = frames.cols();
  if (offset + length > frames.rows()) throw std::out_of_range("window past end of sequence");
  const auto src = frames.data().subspan(offset * D, length * D);
  return Tensor({length, D}, std::vector<double>(src.begin(), src.end()));
}

SegmentBatch segment_sequence(const FeatureSequence& seq, std::size_t segment_frames, std::size_t hop) {
  if (segment_frames < 1 || hop < 1) throw std::invalid_argument("segment length and hop must be >= 1");
  const std::size_t T = seq.num_frames();
  if (T < segment_frames) {
    throw EmptySegmentation("sequence " + std::to_string(seq.sequence_id) + " has " + std::to_string(T) +
                            " frames, fewer than the segment length " + std::to_string(segment_frames));
  }
  SegmentBatch batch;
  batch.segment_frames = segment_frames;
  batch.dim = seq.dim();
  std::size_t j = 0;
  for (std::size_t off = 0; off + segment_frames <= T; off += hop, ++j) {
    batch.segments.push_back(window(seq.frames, off, segment_frames));
    batch.owner.push_back(seq.sequence_id);
    batch.index_within_sequence.push_back(j);
  }
  return batch;
}

std::vector<std::size_t> covering_offsets(std::size_t num_frames, std::size_t segment_frames,
                                          std::size_t hop) {
  if (segment_frames < 1 || hop < 1) throw std::invalid_argument("segment length and hop must be >= 1");
  if (num_frames < segment_frames) {
    throw EmptySegmentation(std::to_string(num_frames) + " frames cannot hold a segment of " +
                            std::to_string(segment_frames));
  }
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (; off + segment_frames <= num_frames; off += hop) offsets.push_back(off);
  const std::size_t covered = offsets.back() + segment_frames;
  if (covered < num_frames) offsets.push_back(num_frames - segment_frames);
  return offsets;
}

}  // namespace fhvc::corpus

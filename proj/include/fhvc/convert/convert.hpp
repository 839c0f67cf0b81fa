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
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fhvc/corpus/features.hpp"
#include "fhvc/model/fhvae.hpp"

namespace fhvc::convert {

class ConversionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Average Z2 posterior mean over every segment of one or more utterances.
struct SpeakerEmbedding {
  std::vector<double> z2_mean;
  std::size_t segment_count = 0;
  std::vector<std::int64_t> source_ids;
};

// Utterances shorter than one segment are skipped; throws ConversionError
// when none remain.
SpeakerEmbedding speaker_embedding(std::span<const corpus::FeatureSequence> utterances,
                                   const model::FhvaeModel& model);

// Maps the Z2 posterior mean of each segment to the Z2 used for decoding.
using Z2Map = std::function<std::vector<double>(const std::vector<double>&)>;

// Encodes every covering window of `input`, infers Z1 from the original Z2
// mean, decodes with map(z2), averages overlapping frames and
// de-normalizes. Output has the input's frame count and metadata.
corpus::FeatureSequence transform_latents(const corpus::FeatureSequence& input, const model::FhvaeModel& model,
                                          const Z2Map& map);

corpus::FeatureSequence reconstruct(const corpus::FeatureSequence& input, const model::FhvaeModel& model);

// z2 ← z2 + (trg − src).
corpus::FeatureSequence convert_difference(const corpus::FeatureSequence& input, const SpeakerEmbedding& src,
                                           const SpeakerEmbedding& trg, const model::FhvaeModel& model);

// z2 ← trg for every segment.
corpus::FeatureSequence convert_replace(const corpus::FeatureSequence& input, const SpeakerEmbedding& trg,
                                        const model::FhvaeModel& model);

}  // namespace fhvc::convert

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
#include <vector>

#include "fhvc/corpus/features.hpp"

namespace fhvc::corpus {

/// Parameters of the synthetic multi-speaker corpus.
///
/// Utterance u of every speaker follows the same content path (a random walk
/// over shared templates with smooth transitions), so the corpus is parallel
/// across speakers. Each speaker applies its own per-dimension gain and
/// offset, then i.i.d. Gaussian noise is added.
struct SyntheticSpec {
  std::size_t speakers = 8;
  std::size_t utterances_per_speaker = 10;
  std::size_t frames = 120;
  std::size_t dim = 8;
  std::size_t templates = 6;
  double offset_scale = 1.5;
  double noise_scale = 0.1;
  std::uint64_t seed = 7;
  // Global index of the first generated speaker. Speakers and content paths
  // are keyed by global index, so two specs with the same seed agree on
  // every speaker and utterance they share.
  std::size_t first_speaker = 0;
  std::size_t first_utterance = 0;
  double frame_shift_ms = 5.0;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<FeatureSequence> sequences;
  std::vector<std::size_t> speaker;  // global speaker index per sequence
  std::vector<std::size_t> content;  // global content (utterance) index per sequence
  std::vector<std::vector<int>> frame_template;  // dominant template per frame
};

SyntheticCorpus gen_synthetic_corpus(const SyntheticSpec& spec);

std::string speaker_name(std::size_t global_index);

}  // namespace fhvc::corpus

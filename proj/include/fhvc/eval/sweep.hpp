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
#include <span>
#include <vector>

#include "fhvc/corpus/features.hpp"
#include "fhvc/model/fhvae.hpp"

namespace fhvc::eval {

struct SweepRow {
  std::size_t n_sentences = 0;
  double mel_cd_db = 0.0;
  double std = 0.0;  // across repeats (sample std; 0 for a single run)
  std::size_t runs = 0;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// A parallel corpus: every speaker has an utterance of each content index.
/// Utterances with a content index in `test_contents` are converted and
/// scored; all others form the embedding pool.
struct SweepInput {
  std::span<const corpus::FeatureSequence> sequences;
  std::span<const std::size_t> speaker;
  std::span<const std::size_t> content;
  std::vector<std::size_t> test_contents;
};

struct SweepOptions {
  std::size_t repeats = 5;
  std::size_t workers = 1;
  // Align with DTW; otherwise frames pair one to one (lengths must match).
  bool align = false;
};

// For each n, each repeat draws n pool utterances per speaker, embeds them,
// converts every test utterance of every speaker to every other speaker by
// difference vector and scores mel-CD against the target speaker's
// rendition of the same content. Deterministic per seed and independent of
// the worker count.
std::vector<SweepRow> sweep_training_size(const SweepInput& input, const model::FhvaeModel& model,
                                          std::span<const std::size_t> ns, std::uint64_t seed,
                                          const SweepOptions& options = {});

}  // namespace fhvc::eval

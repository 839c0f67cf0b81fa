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
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhvc/core/tensor.hpp"

namespace fhvc::corpus {

/// One utterance: T frames of D acoustic features.
struct FeatureSequence {
  std::int64_t sequence_id = 0;
  std::string speaker_label;
  Tensor frames;  // T×D
  double frame_shift_ms = 5.0;

  std::size_t num_frames() const { return frames.empty() ? 0 : frames.rows(); }
  std::size_t dim() const { return frames.empty() ? 0 : frames.cols(); }
  // Throws std::invalid_argument unless T >= 1, D >= 1 and all values finite.
  void validate() const;
};

enum class FeatureFileErrorKind { io, bad_magic, unsupported_version, truncated, non_finite, invalid };

class FeatureFileError : public std::runtime_error {
 public:
  FeatureFileError(FeatureFileErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  FeatureFileErrorKind kind() const noexcept { return kind_; }

 private:
  FeatureFileErrorKind kind_;
};

inline constexpr char kFeatureMagic[4] = {'F', 'H', 'V', 'C'};
inline constexpr std::uint32_t kFeatureVersion = 1;

// "FHVC" | u32 version | u32 T | u32 D | f32 frame_shift_ms | u32 label bytes |
// label | T·D f32 row-major, all little-endian.
std::vector<std::uint8_t> encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(std::span<const std::uint8_t> bytes, std::int64_t sequence_id = 0);

void write_features(const FeatureSequence& seq, const std::filesystem::path& path);
FeatureSequence read_features(const std::filesystem::path& path, std::int64_t sequence_id = 0);

}  // namespace fhvc::corpus

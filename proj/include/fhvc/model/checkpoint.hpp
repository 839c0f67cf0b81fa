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

#include "fhvc/model/fhvae.hpp"

namespace fhvc::model {

enum class CheckpointErrorKind { io, bad_magic, version_mismatch, corrupt };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  CheckpointErrorKind kind() const noexcept { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

inline constexpr char kCheckpointMagic[4] = {'F', 'H', 'V', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// "FHVM" | u32 version | u32 n | n bytes of "key=value" config lines |
// u32 sections | per section: u32 name bytes, name, u32 rank, rank×u32 dims,
// f64 data. Sections are the parameters plus norm.mean, norm.std, seq.ids
// and seq.segments. Little-endian throughout.
std::vector<std::uint8_t> encode_model(const FhvaeModel& model);
FhvaeModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const FhvaeModel& model, const std::filesystem::path& path);
FhvaeModel load_model(const std::filesystem::path& path);

// "key=value" lines, doubles printed with 17 significant digits.
std::string config_text(const ModelConfig& config);
ModelConfig parse_config_text(const std::string& text);

}  // namespace fhvc::model

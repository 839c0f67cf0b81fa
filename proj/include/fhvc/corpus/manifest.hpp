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
#include <stdexcept>
#include <string>
#include <vector>

#include "fhvc/corpus/features.hpp"

namespace fhvc::corpus {

/// One line of a corpus manifest: `<sequence_id>\t<speaker_label>\t<path>`.
struct ManifestEntry {
  std::int64_t sequence_id = 0;
  std::string speaker_label;
  std::filesystem::path path;
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relative paths are resolved against the manifest's directory. Blank lines
// and lines starting with '#' are skipped.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest);

// Loads every listed file; the manifest's id and label take precedence over
// the file header.
std::vector<FeatureSequence> load_corpus(const std::filesystem::path& manifest);

}  // namespace fhvc::corpus

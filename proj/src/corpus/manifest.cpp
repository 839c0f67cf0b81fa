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

#include "fhvc/corpus/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace fhvc::corpus {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ManifestError("cannot open manifest '" + manifest.string() + "'");
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::set<std::int64_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw ManifestError(manifest.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    ManifestEntry e;
    const std::string id = line.substr(0, t1);
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), e.sequence_id);
    if (ec != std::errc() || ptr != id.data() + id.size()) {
      throw ManifestError(manifest.string() + ":" + std::to_string(lineno) + ": bad sequence id '" + id + "'");
    }
    if (!seen.insert(e.sequence_id).second) {
      throw ManifestError(manifest.string() + ":" + std::to_string(lineno) + ": duplicate sequence id " + id);
    }
    e.speaker_label = line.substr(t1 + 1, t2 - t1 - 1);
    std::filesystem::path p = line.substr(t2 + 1);
    if (p.empty()) throw ManifestError(manifest.string() + ":" + std::to_string(lineno) + ": empty path");
    e.path = p.is_relative() ? base / p : p;
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest) {
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw ManifestError("cannot write manifest '" + manifest.string() + "'");
  for (const auto& e : entries) {
    if (e.speaker_label.find_first_of("\t\n") != std::string::npos) {
      throw ManifestError("speaker label may not contain tabs or newlines");
    }
    out << e.sequence_id << '\t' << e.speaker_label << '\t' << e.path.generic_string() << '\n';
  }
  if (!out) throw ManifestError("error writing manifest '" + manifest.string() + "'");
}

std::vector<FeatureSequence> load_corpus(const std::filesystem::path& manifest) {
  std::vector<FeatureSequence> out;
  for (const auto& e : read_manifest(manifest)) {
    FeatureSequence seq = read_features(e.path, e.sequence_id);
    seq.speaker_label = e.speaker_label;
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace fhvc::corpus

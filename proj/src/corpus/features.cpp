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

#include "fhvc/corpus/features.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "fhvc/corpus/binary_io.hpp"

namespace fhvc::corpus {

void FeatureSequence::validate() const {
  if (frames.rank() != 2) throw std::invalid_argument("feature frames must be a T×D matrix");
  if (num_frames() < 1 || dim() < 1) {
    throw std::invalid_argument("feature sequence " + std::to_string(sequence_id) + " is empty (" +
                                shape_string(frames.shape()) + ")");
  }
  if (!frames.all_finite()) {
    throw std::invalid_argument("feature sequence " + std::to_string(sequence_id) + " has non-finite values");
  }
}

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq) {
  try {
    seq.validate();
  } catch (const std::invalid_argument& e) {
    throw FeatureFileError(FeatureFileErrorKind::invalid, e.what());
  }
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (seq.num_frames() > kMax || seq.dim() > kMax || seq.speaker_label.size() > kMax) {
    throw FeatureFileError(FeatureFileErrorKind::invalid, "feature sequence too large for FHVC format");
  }
  for (double v : seq.frames.data()) {
    if (!std::isfinite(static_cast<float>(v))) {
      throw FeatureFileError(FeatureFileErrorKind::non_finite, "value overflows 32-bit float");
    }
  }
  io::ByteWriter w;
  w.bytes(kFeatureMagic, 4);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(seq.num_frames()));
  w.u32(static_cast<std::uint32_t>(seq.dim()));
  w.f32(static_cast<float>(seq.frame_shift_ms));
  w.u32(static_cast<std::uint32_t>(seq.speaker_label.size()));
  w.text(seq.speaker_label);
  for (double v : seq.frames.data()) w.f32(static_cast<float>(v));
  return std::move(w.buffer());
}

FeatureSequence decode_features(std::span<const std::uint8_t> bytes, std::int64_t sequence_id) {
  io::ByteReader r(bytes);
  auto truncated = [](const char* where) {
    return FeatureFileError(FeatureFileErrorKind::truncated, std::string("truncated FHVC data: ") + where);
  };
  auto magic = r.bytes(4);
  if (!magic) throw truncated("magic");
  if (std::memcmp(magic->data(), kFeatureMagic, 4) != 0) {
    throw FeatureFileError(FeatureFileErrorKind::bad_magic, "not an FHVC feature file (bad magic)");
  }
  auto version = r.u32();
  if (!version) throw truncated("version");
  if (*version != kFeatureVersion) {
    throw FeatureFileError(FeatureFileErrorKind::unsupported_version,
                           "unsupported FHVC version " + std::to_string(*version));
  }
  auto T = r.u32();
  auto D = r.u32();
  auto shift = r.f32();
  auto label_len = r.u32();
  if (!T || !D || !shift || !label_len) throw truncated("header");
  if (*T == 0 || *D == 0) throw FeatureFileError(FeatureFileErrorKind::invalid, "FHVC file with zero frames or dims");
  auto label = r.text(*label_len);
  if (!label) throw truncated("label");
  const std::size_t count = static_cast<std::size_t>(*T) * *D;
  if (r.remaining() / 4 < count) throw truncated("payload");
  if (r.remaining() != count * 4) {
    throw FeatureFileError(FeatureFileErrorKind::invalid, "trailing bytes after FHVC payload");
  }
  if (!std::isfinite(*shift)) throw FeatureFileError(FeatureFileErrorKind::non_finite, "non-finite frame shift");

  FeatureSequence seq;
  seq.sequence_id = sequence_id;
  seq.speaker_label = std::move(*label);
  seq.frame_shift_ms = static_cast<double>(*shift);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float v = *r.f32();
    if (!std::isfinite(v)) {
      throw FeatureFileError(FeatureFileErrorKind::non_finite,
                             "non-finite feature value at frame " + std::to_string(i / *D));
    }
    data[i] = static_cast<double>(v);
  }
  seq.frames = Tensor({*T, *D}, std::move(data));
  return seq;
}

void write_features(const FeatureSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_features(seq);
  try {
    io::write_file(path, bytes);
  } catch (const std::runtime_error& e) {
    throw FeatureFileError(FeatureFileErrorKind::io, e.what());
  }
}

FeatureSequence read_features(const std::filesystem::path& path, std::int64_t sequence_id) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = io::read_file(path);
  } catch (const std::runtime_error& e) {
    throw FeatureFileError(FeatureFileErrorKind::io, e.what());
  }
  return decode_features(bytes, sequence_id);
}

}  // namespace fhvc::corpus

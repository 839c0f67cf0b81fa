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

#include <cmath>
#include <filesystem>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "doctest.h"
#include "fhvc/core/rng.hpp"
#include "fhvc/corpus/binary_io.hpp"
#include "fhvc/corpus/features.hpp"
#include "fhvc/corpus/manifest.hpp"
#include "fhvc/corpus/norm.hpp"
#include "fhvc/corpus/segment.hpp"
#include "fhvc/corpus/synthetic.hpp"

using namespace fhvc;
using namespace fhvc::corpus;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fhvc_test_corpus";
  fs::create_directories(dir);
  return dir / name;
}

FeatureSequence random_sequence(std::size_t T, std::size_t D, SeededRng& rng, double scale = 3.0) {
  FeatureSequence s;
  s.sequence_id = 3;
  s.speaker_label = "spëaker-α";
  s.frames = standard_normal({T, D}, rng);
  for (double& v : s.frames.data()) v *= scale;
  s.frame_shift_ms = 5.0;
  return s;
}

// Brute-force per-frame nearest-speaker-mean accuracy on raw frames.
double raw_frame_accuracy(const SyntheticCorpus& c) {
  std::map<std::size_t, std::vector<double>> sums;
  std::map<std::size_t, std::size_t> counts;
  const std::size_t D = c.sequences[0].dim();
  for (std::size_t i = 0; i < c.sequences.size(); ++i) {
    auto& s = sums[c.speaker[i]];
    s.resize(D, 0.0);
    const auto& f = c.sequences[i].frames;
    for (std::size_t t = 0; t < f.rows(); ++t)
      for (std::size_t d = 0; d < D; ++d) s[d] += f(t, d);
    counts[c.speaker[i]] += f.rows();
  }
  for (auto& [k, s] : sums)
    for (double& v : s) v /= static_cast<double>(counts[k]);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < c.sequences.size(); ++i) {
    const auto& f = c.sequences[i].frames;
    for (std::size_t t = 0; t < f.rows(); ++t) {
      double best = INFINITY;
      std::size_t arg = 0;
      for (const auto& [k, m] : sums) {
        double dist = 0;
        for (std::size_t d = 0; d < D; ++d) dist += (f(t, d) - m[d]) * (f(t, d) - m[d]);
        if (dist < best) best = dist, arg = k;
      }
      correct += arg == c.speaker[i];
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("feature files round-trip at 32-bit precision") {
  SeededRng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = 1 + rng.below(50), D = 1 + rng.below(40);
    const FeatureSequence s = random_sequence(T, D, rng, std::pow(10.0, static_cast<double>(rng.below(8)) - 3.0));
    const fs::path p = scratch("rt.fhvc");
    write_features(s, p);
    const FeatureSequence r = read_features(p, s.sequence_id);
    REQUIRE(r.frames.shape() == s.frames.shape());
    CHECK(r.speaker_label == s.speaker_label);
    CHECK(r.frame_shift_ms == 5.0);
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      CHECK(r.frames[i] == static_cast<double>(static_cast<float>(s.frames[i])));
    }
  }
}

TEST_CASE("a 39-dimensional 5 ms MCEP file has the documented layout") {
  SeededRng rng(2);
  FeatureSequence s = random_sequence(7, 39, rng);
  s.speaker_label = "bdl";
  const auto bytes = encode_features(s);
  REQUIRE(bytes.size() == 4 + 4 * 5 + 3 + 7 * 39 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FHVC");
  io::ByteReader r(bytes);
  r.bytes(4);
  CHECK(*r.u32() == 1);
  CHECK(*r.u32() == 7);
  CHECK(*r.u32() == 39);
  CHECK(*r.f32() == 5.0f);
  CHECK(*r.u32() == 3);
  CHECK(*r.text(3) == "bdl");
  CHECK(*r.f32() == static_cast<float>(s.frames[0]));
}

TEST_CASE("corrupt feature files raise distinct errors") {
  SeededRng rng(3);
  const auto good = encode_features(random_sequence(4, 3, rng));

  auto kind_of = [](std::vector<std::uint8_t> bytes) {
    try {
      decode_features(bytes);
    } catch (const FeatureFileError& e) {
      return e.kind();
    }
    FAIL("expected FeatureFileError");
    return FeatureFileErrorKind::io;
  };

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(kind_of(bad_magic) == FeatureFileErrorKind::bad_magic);

  auto truncated = good;
  truncated.resize(good.size() - 3);
  CHECK(kind_of(truncated) == FeatureFileErrorKind::truncated);
  CHECK(kind_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)) == FeatureFileErrorKind::truncated);

  auto version = good;
  version[4] = 9;
  CHECK(kind_of(version) == FeatureFileErrorKind::unsupported_version);

  auto nan = good;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + nan.size() - 4, &q, 4);
  CHECK(kind_of(nan) == FeatureFileErrorKind::non_finite);

  CHECK_THROWS_AS(read_features(scratch("does-not-exist.fhvc")), FeatureFileError);

  FeatureSequence inf = random_sequence(2, 2, rng);
  inf.frames[1] = INFINITY;
  CHECK_THROWS_AS(encode_features(inf), FeatureFileError);
}

TEST_CASE("segment counts follow floor((T-S)/hop)+1") {
  SeededRng rng(4);
  CHECK(segment_sequence(random_sequence(100, 2, rng), 20, 20).size() == 5);
  CHECK(segment_sequence(random_sequence(50, 2, rng), 20, 10).size() == 4);
  CHECK_THROWS_AS(segment_sequence(random_sequence(19, 2, rng), 20, 20), EmptySegmentation);
}

TEST_CASE("segmentation never reads past T or emits partial windows") {
  SeededRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t S = 1 + rng.below(12), hop = 1 + rng.below(12);
    const std::size_t T = S + rng.below(40);
    FeatureSequence s = random_sequence(T, 2, rng);
    for (std::size_t t = 0; t < T; ++t) s.frames(t, 0) = static_cast<double>(t);
    const SegmentBatch b = segment_sequence(s, S, hop);
    REQUIRE(b.size() == (T - S) / hop + 1);
    for (std::size_t j = 0; j < b.size(); ++j) {
      REQUIRE(b.segments[j].rows() == S);
      CHECK(b.segments[j](0, 0) == static_cast<double>(j * hop));
      CHECK(b.segments[j](S - 1, 0) <= static_cast<double>(T - 1));
      CHECK(b.owner[j] == s.sequence_id);
      CHECK(b.index_within_sequence[j] == j);
    }
    const auto cover = covering_offsets(T, S, hop);
    CHECK(cover.back() + S == (hop <= S ? T : cover.back() + S));
    if (hop <= S) CHECK(cover.back() + S == T);
  }
}

TEST_CASE("normalization statistics") {
  SUBCASE("constant features floor the std and normalize to zero") {
    FeatureSequence s;
    s.frames = Tensor::filled(5, 3, 2.5);
    std::vector<FeatureSequence> c{s};
    const NormStats st = fit_norm_stats(c);
    for (double v : st.stddev) CHECK(v == kStdFloor);
    const FeatureSequence z = apply_norm(s, st, NormDirection::forward);
    for (double v : z.frames.data()) CHECK(v == 0.0);
  }
  SUBCASE("two-frame corpus matches a hand computation") {
    FeatureSequence s;
    s.frames = Tensor::from_rows({{1.0, -2.0}, {3.0, 6.0}});
    std::vector<FeatureSequence> c{s};
    const NormStats st = fit_norm_stats(c);
    CHECK(st.mean == std::vector<double>{2.0, 2.0});
    CHECK(st.stddev == std::vector<double>{1.0, 4.0});
  }
  SUBCASE("forward then inverse is the identity") {
    SeededRng rng(6);
    std::vector<FeatureSequence> c;
    for (int i = 0; i < 5; ++i) c.push_back(random_sequence(10 + i, 4, rng));
    const NormStats st = fit_norm_stats(c);
    for (const auto& s : c) {
      const auto back = apply_norm(apply_norm(s, st, NormDirection::forward), st, NormDirection::inverse);
      for (std::size_t i = 0; i < s.frames.size(); ++i) CHECK(std::abs(back.frames[i] - s.frames[i]) < 1e-9);
    }
  }
  SUBCASE("dimension mismatch is an error") {
    SeededRng rng(7);
    std::vector<FeatureSequence> c{random_sequence(3, 2, rng), random_sequence(3, 3, rng)};
    CHECK_THROWS_AS(fit_norm_stats(c), std::invalid_argument);
    std::vector<FeatureSequence> one{random_sequence(3, 2, rng)};
    CHECK_THROWS_AS(apply_norm(random_sequence(3, 5, rng), fit_norm_stats(one), NormDirection::forward),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_norm_stats(std::vector<FeatureSequence>{}), std::invalid_argument);
  }
}

TEST_CASE("synthetic corpus determinism and degenerate cases") {
  SyntheticSpec spec;
  const SyntheticCorpus a = gen_synthetic_corpus(spec);
  const SyntheticCorpus b = gen_synthetic_corpus(spec);
  REQUIRE(a.sequences.size() == 80);
  for (std::size_t i = 0; i < a.sequences.size(); ++i) {
    CHECK(a.sequences[i].frames == b.sequences[i].frames);
    CHECK(a.sequences[i].frames.shape() == Shape{120, 8});
  }

  SyntheticSpec flat = spec;
  flat.offset_scale = 0.0;
  flat.noise_scale = 0.0;
  const SyntheticCorpus f = gen_synthetic_corpus(flat);
  const std::size_t U = flat.utterances_per_speaker;
  for (std::size_t k = 1; k < flat.speakers; ++k)
    for (std::size_t u = 0; u < U; ++u) CHECK(f.sequences[k * U + u].frames == f.sequences[u].frames);

  SyntheticSpec shifted = spec;
  shifted.first_speaker = 3;
  shifted.speakers = 2;
  shifted.utterances_per_speaker = 12;
  const SyntheticCorpus s = gen_synthetic_corpus(shifted);
  CHECK(s.sequences[0].speaker_label == "spk03");
  CHECK(s.sequences[0].frames == a.sequences[3 * 10].frames);
  CHECK(s.sequences[12 + 9].frames == a.sequences[4 * 10 + 9].frames);

  SyntheticSpec bad = spec;
  bad.templates = 0;
  CHECK_THROWS_AS(gen_synthetic_corpus(bad), std::invalid_argument);
  bad = spec;
  bad.noise_scale = -1;
  CHECK_THROWS_AS(gen_synthetic_corpus(bad), std::invalid_argument);
}

TEST_CASE("speakers are separable on raw frames and separability grows with offset scale") {
  SyntheticSpec spec;
  spec.offset_scale = 2.0;
  spec.noise_scale = 0.1;
  CHECK(raw_frame_accuracy(gen_synthetic_corpus(spec)) > 0.9);

  double previous = -1.0;
  for (double scale : {0.0, 0.5, 1.0, 2.0}) {
    spec.offset_scale = scale;
    const double acc = raw_frame_accuracy(gen_synthetic_corpus(spec));
    CAPTURE(scale);
    CHECK(acc > previous);
    previous = acc;
  }
}

TEST_CASE("content labels follow the template path") {
  SyntheticSpec spec;
  spec.offset_scale = 0.0;
  spec.noise_scale = 0.0;
  const SyntheticCorpus c = gen_synthetic_corpus(spec);
  const auto& labels = c.frame_template[0];
  REQUIRE(labels.size() == spec.frames);
  int changes = 0;
  for (std::size_t t = 1; t < labels.size(); ++t) changes += labels[t] != labels[t - 1];
  CHECK(changes >= 3);
  CHECK(changes <= static_cast<int>(spec.frames / 12));
  // Consecutive frames move smoothly.
  const auto& fr = c.sequences[0].frames;
  for (std::size_t t = 1; t < fr.rows(); ++t) {
    double jump = 0.0;
    for (std::size_t d = 0; d < fr.cols(); ++d) jump = std::max(jump, std::abs(fr(t, d) - fr(t - 1, d)));
    CHECK(jump < 1.5);
  }
}

TEST_CASE("manifest round-trip and validation") {
  std::vector<ManifestEntry> entries{{0, "spk00", "a.fhvc"}, {7, "", "sub/b.fhvc"}};
  const fs::path m = scratch("corpus.tsv");
  write_manifest(entries, m);
  const auto back = read_manifest(m);
  REQUIRE(back.size() == 2);
  CHECK(back[1].sequence_id == 7);
  CHECK(back[1].speaker_label.empty());
  CHECK(back[1].path == m.parent_path() / "sub/b.fhvc");

  std::ofstream(scratch("bad.tsv")) << "1\tspk\n";
  CHECK_THROWS_AS(read_manifest(scratch("bad.tsv")), ManifestError);
  std::ofstream(scratch("dup.tsv")) << "1\ta\tx\n1\tb\ty\n";
  CHECK_THROWS_AS(read_manifest(scratch("dup.tsv")), ManifestError);

  SeededRng rng(8);
  const FeatureSequence s = random_sequence(5, 3, rng);
  write_features(s, scratch("a.fhvc"));
  std::ofstream(scratch("one.tsv")) << "# comment\n42\tbdl\ta.fhvc\n";
  const auto loaded = load_corpus(scratch("one.tsv"));
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].sequence_id == 42);
  CHECK(loaded[0].speaker_label == "bdl");
}

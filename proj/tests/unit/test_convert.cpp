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


#include <doctest.h>

#include <cstring>

#include "fhvc/convert/convert.hpp"
#include "fhvc/corpus/segment.hpp"
#include "model_fixtures.hpp"

using namespace fhvc;
using namespace fhvc::convert;
using fhvc::testing::jittered_model;
using fhvc::testing::tiny_config;

namespace {

corpus::FeatureSequence make_utterance(std::int64_t id, std::size_t frames, std::size_t dim, SeededRng& rng) {
  corpus::FeatureSequence s;
  s.sequence_id = id;
  s.speaker_label = "spk";
  s.frames = fhvc::testing::random_segment(frames, dim, rng);
  return s;
}

model::FhvaeModel test_model() {
  auto m = jittered_model(tiny_config(3, 4, 5, 2, 2), 3, 31);
  m.norm.mean = {0.5, -1.0, 2.0};
  m.norm.stddev = {2.0, 0.5, 1.5};
  return m;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("embedding of a one-segment utterance is that segment's posterior mean") {
  auto m = test_model();
  SeededRng rng(1);
  auto u = make_utterance(7, 4, 3, rng);
  auto e = speaker_embedding(std::span(&u, 1), m);
  auto q = model::encode_z2(corpus::apply_norm(u.frames, m.norm, corpus::NormDirection::forward), m);
  CHECK(e.segment_count == 1);
  CHECK(e.source_ids == std::vector<std::int64_t>{7});
  for (std::size_t k = 0; k < 2; ++k) CHECK(e.z2_mean[k] == doctest::Approx(q.mean[k]).epsilon(1e-14));
}

TEST_CASE("embedding is invariant to duplicating the utterance list") {
  auto m = test_model();
  SeededRng rng(2);
  std::vector<corpus::FeatureSequence> us{make_utterance(1, 9, 3, rng), make_utterance(2, 13, 3, rng)};
  auto e1 = speaker_embedding(us, m);
  auto doubled = us;
  doubled.insert(doubled.end(), us.begin(), us.end());
  auto e2 = speaker_embedding(doubled, m);
  CHECK(e2.segment_count == 2 * e1.segment_count);
  for (std::size_t k = 0; k < 2; ++k) CHECK(e2.z2_mean[k] == doctest::Approx(e1.z2_mean[k]).epsilon(1e-12));
}

TEST_CASE("embedding errors") {
  auto m = test_model();
  SeededRng rng(3);
  std::vector<corpus::FeatureSequence> none{make_utterance(1, 3, 3, rng)};
  CHECK_THROWS_AS(speaker_embedding(none, m), ConversionError);
  CHECK_THROWS_AS(speaker_embedding({}, m), ConversionError);
  std::vector<corpus::FeatureSequence> wrong{make_utterance(1, 8, 4, rng)};
  CHECK_THROWS_AS(speaker_embedding(wrong, m), ConversionError);
  // Short utterances are skipped when a longer one is present.
  std::vector<corpus::FeatureSequence> mixed{make_utterance(1, 3, 3, rng), make_utterance(2, 8, 3, rng)};
  CHECK(speaker_embedding(mixed, m).source_ids == std::vector<std::int64_t>{2});
}

TEST_CASE("zero difference vector reproduces reconstruction bit for bit") {
  auto m = test_model();
  SeededRng rng(4);
  std::vector<corpus::FeatureSequence> us{make_utterance(1, 12, 3, rng)};
  auto e = speaker_embedding(us, m);
  for (std::size_t T : {4, 8, 11, 17}) {
    auto input = make_utterance(9, T, 3, rng);
    auto rec = reconstruct(input, m);
    auto conv = convert_difference(input, e, e, m);
    CHECK(bit_equal(rec.frames, conv.frames));
    CHECK(rec.num_frames() == T);
    CHECK(rec.sequence_id == input.sequence_id);
  }
}

TEST_CASE("conversion preserves frame count and averages overlapping tail frames") {
  auto m = test_model();
  SeededRng rng(5);
  auto input = make_utterance(3, 10, 3, rng);  // windows at 0, 4 and a tail at 6
  auto rec = reconstruct(input, m);
  REQUIRE(rec.num_frames() == 10);

  auto norm = corpus::apply_norm(input.frames, m.norm, corpus::NormDirection::forward);
  std::vector<Tensor> windows;
  for (std::size_t off : {0, 4, 6}) windows.push_back(corpus::window(norm, off, 4));
  auto q2 = model::encode_z2_batch(windows, m);
  std::vector<std::vector<double>> z2, z1;
  for (auto& q : q2) z2.push_back(q.mean);
  for (auto& q : model::encode_z1_batch(windows, z2, m)) z1.push_back(q.mean);
  auto dec = model::decode_batch(z1, z2, m);
  // Frame 7 is covered by windows at 4 (row 3) and 6 (row 1).
  for (std::size_t j = 0; j < 3; ++j) {
    const double avg = 0.5 * (dec[1](3, j) + dec[2](1, j));
    const double expected = avg * m.norm.stddev[j] + m.norm.mean[j];
    CHECK(rec.frames(7, j) == doctest::Approx(expected).epsilon(1e-12));
    const double only = dec[0](2, j) * m.norm.stddev[j] + m.norm.mean[j];
    CHECK(rec.frames(2, j) == doctest::Approx(only).epsilon(1e-12));
  }
}

TEST_CASE("difference conversion decodes shifted z2 with z1 from the original z2") {
  auto m = test_model();
  SeededRng rng(6);
  std::vector<corpus::FeatureSequence> a{make_utterance(1, 8, 3, rng)};
  std::vector<corpus::FeatureSequence> b{make_utterance(2, 8, 3, rng)};
  auto ea = speaker_embedding(a, m), eb = speaker_embedding(b, m);
  auto input = make_utterance(5, 4, 3, rng);
  auto out = convert_difference(input, ea, eb, m);
  auto norm = corpus::apply_norm(input.frames, m.norm, corpus::NormDirection::forward);
  auto q2 = model::encode_z2(norm, m);
  auto q1 = model::encode_z1(norm, q2.mean, m);
  std::vector<double> z2 = q2.mean;
  for (std::size_t k = 0; k < 2; ++k) z2[k] += eb.z2_mean[k] - ea.z2_mean[k];
  auto want = corpus::apply_norm(model::decode(q1.mean, z2, m).frames, m.norm, corpus::NormDirection::inverse);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(out.frames[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("replace conversion ignores the input z2") {
  auto m = test_model();
  SeededRng rng(7);
  std::vector<corpus::FeatureSequence> b{make_utterance(2, 8, 3, rng)};
  auto eb = speaker_embedding(b, m);
  auto input = make_utterance(5, 4, 3, rng);
  auto out = convert_replace(input, eb, m);
  auto norm = corpus::apply_norm(input.frames, m.norm, corpus::NormDirection::forward);
  auto q2 = model::encode_z2(norm, m);
  auto q1 = model::encode_z1(norm, q2.mean, m);
  auto want = corpus::apply_norm(model::decode(q1.mean, eb.z2_mean, m).frames, m.norm, corpus::NormDirection::inverse);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(out.frames[i] == doctest::Approx(want[i]).epsilon(1e-12));
  CHECK(bit_equal(convert_replace(input, eb, m).frames, out.frames));
}

TEST_CASE("conversion leaves model and embeddings untouched") {
  auto m = test_model();
  const auto before = m.params;
  SeededRng rng(8);
  std::vector<corpus::FeatureSequence> a{make_utterance(1, 8, 3, rng)};
  auto e = speaker_embedding(a, m);
  const auto e_before = e.z2_mean;
  auto input = make_utterance(5, 9, 3, rng);
  convert_difference(input, e, e, m);
  convert_replace(input, e, m);
  CHECK(m.params == before);
  CHECK(e.z2_mean == e_before);
}

TEST_CASE("conversion input errors") {
  auto m = test_model();
  SeededRng rng(9);
  std::vector<corpus::FeatureSequence> a{make_utterance(1, 8, 3, rng)};
  auto e = speaker_embedding(a, m);
  CHECK_THROWS_AS(reconstruct(make_utterance(1, 3, 3, rng), m), ConversionError);
  CHECK_THROWS_AS(reconstruct(make_utterance(1, 8, 2, rng), m), ConversionError);
  SpeakerEmbedding bad = e;
  bad.z2_mean.push_back(0.0);
  CHECK_THROWS_AS(convert_difference(make_utterance(1, 8, 3, rng), e, bad, m), ConversionError);
  CHECK_THROWS_AS(convert_replace(make_utterance(1, 8, 3, rng), bad, m), ConversionError);
  SpeakerEmbedding empty = e;
  empty.segment_count = 0;
  CHECK_THROWS_AS(convert_replace(make_utterance(1, 8, 3, rng), empty, m), ConversionError);
}

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

#include <cstdlib>
#include <map>

#include "fhvc/cli/config.hpp"
#include "fhvc/convert/convert.hpp"
#include "fhvc/corpus/synthetic.hpp"
#include "fhvc/eval/latents.hpp"
#include "fhvc/eval/sweep.hpp"
#include "fhvc/model/checkpoint.hpp"
#include "fhvc/model/train.hpp"

// Properties of the model trained by the reference_model fixture. Paths come
// from FHVC_REFERENCE_CONFIG and FHVC_REFERENCE_MODEL.

using namespace fhvc;

namespace {

struct Trained {
  cli::CliConfig cfg;
  corpus::SyntheticCorpus train;
  corpus::SyntheticCorpus held;
  model::FhvaeModel model;
};

const Trained& trained() {
  static const Trained t = [] {
    const char* conf = std::getenv("FHVC_REFERENCE_CONFIG");
    const char* path = std::getenv("FHVC_REFERENCE_MODEL");
    REQUIRE_MESSAGE(conf != nullptr, "FHVC_REFERENCE_CONFIG is not set");
    REQUIRE_MESSAGE(path != nullptr, "FHVC_REFERENCE_MODEL is not set");
    Trained out;
    out.cfg.merge_file(conf);
    auto spec = out.cfg.synthetic_spec();
    out.train = corpus::gen_synthetic_corpus(spec);
    spec.first_utterance += spec.utterances_per_speaker;
    spec.utterances_per_speaker = out.cfg.get_size("sweep.held_out");
    out.held = corpus::gen_synthetic_corpus(spec);
    out.model = model::load_model(path);
    return out;
  }();
  return t;
}

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double corpus_variance(const corpus::SyntheticCorpus& c) {
  const std::size_t d = c.sequences.front().dim();
  std::vector<double> s(d, 0.0), s2(d, 0.0);
  double n = 0.0;
  for (const auto& seq : c.sequences) {
    for (std::size_t t = 0; t < seq.num_frames(); ++t) {
      for (std::size_t k = 0; k < d; ++k) {
        s[k] += seq.frames(t, k);
        s2[k] += seq.frames(t, k) * seq.frames(t, k);
      }
      n += 1.0;
    }
  }
  double v = 0.0;
  for (std::size_t k = 0; k < d; ++k) v += s2[k] / n - (s[k] / n) * (s[k] / n);
  return v / static_cast<double>(d);
}

double frame_mse(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

convert::SpeakerEmbedding embed_one(const corpus::FeatureSequence& s, const model::FhvaeModel& m) {
  return convert::speaker_embedding(std::span(&s, 1), m);
}

}  // namespace

TEST_CASE("Z2 posteriors of same-speaker segments are closer than different-speaker ones") {
  const auto& t = trained();
  std::vector<eval::SegmentLatents> lat;
  for (const auto& s : t.train.sequences) lat.push_back(eval::segment_latents(s, t.model));
  const std::size_t n = lat.size();
  SeededRng rng(1);
  int closer = 0;
  const int trials = 2000;
  for (int k = 0; k < trials; ++k) {
    const std::size_t a = rng.below(n);
    std::size_t b, c;
    do { b = rng.below(n); } while (b == a || t.train.speaker[b] != t.train.speaker[a]);
    do { c = rng.below(n); } while (t.train.speaker[c] == t.train.speaker[a]);
    const auto za = lat[a].z2.row_span(rng.below(lat[a].z2.rows()));
    const auto zb = lat[b].z2.row_span(rng.below(lat[b].z2.rows()));
    const auto zc = lat[c].z2.row_span(rng.below(lat[c].z2.rows()));
    closer += dist2(za, zb) < dist2(za, zc);
  }
  const double frac = static_cast<double>(closer) / trials;
  INFO("fraction " << frac);
  CHECK(frac >= 0.80);
}

TEST_CASE("Z1 means of same-content segments across speakers are closer than different-content ones") {
  const auto& t = trained();
  std::map<std::pair<std::size_t, std::size_t>, eval::SegmentLatents> lat;  // (speaker, content)
  std::vector<std::size_t> speakers, contents;
  for (std::size_t i = 0; i < t.train.sequences.size(); ++i) {
    lat.emplace(std::pair{t.train.speaker[i], t.train.content[i]}, eval::segment_latents(t.train.sequences[i], t.model));
    if (std::find(speakers.begin(), speakers.end(), t.train.speaker[i]) == speakers.end()) speakers.push_back(t.train.speaker[i]);
    if (std::find(contents.begin(), contents.end(), t.train.content[i]) == contents.end()) contents.push_back(t.train.content[i]);
  }
  SeededRng rng(2);
  int closer = 0;
  const int trials = 2000;
  for (int k = 0; k < trials; ++k) {
    const std::size_t sa = speakers[rng.below(speakers.size())];
    std::size_t sb;
    do { sb = speakers[rng.below(speakers.size())]; } while (sb == sa);
    const std::size_t ca = contents[rng.below(contents.size())];
    std::size_t cc;
    do { cc = contents[rng.below(contents.size())]; } while (cc == ca);
    const std::size_t sc = speakers[rng.below(speakers.size())];
    const auto& la = lat.at({sa, ca}).z1;
    const std::size_t off = rng.below(la.rows());
    const auto& lc = lat.at({sc, cc}).z1;
    closer += dist2(la.row_span(off), lat.at({sb, ca}).z1.row_span(off)) <
              dist2(la.row_span(off), lc.row_span(rng.below(lc.rows())));
  }
  const double frac = static_cast<double>(closer) / trials;
  INFO("fraction " << frac);
  CHECK(frac >= 0.70);
}

TEST_CASE("reconstruction error on held-out utterances is below half the corpus variance") {
  const auto& t = trained();
  double mse = 0.0;
  for (const auto& s : t.held.sequences) mse += frame_mse(convert::reconstruct(s, t.model).frames, s.frames);
  mse /= static_cast<double>(t.held.sequences.size());
  const double var = corpus_variance(t.held);
  INFO("mse " << mse << " variance " << var);
  CHECK(mse < 0.5 * var);
}

TEST_CASE("converted utterances embed closer to the target than the source") {
  const auto& t = trained();
  std::map<std::size_t, convert::SpeakerEmbedding> emb;
  for (std::size_t i = 0; i < t.train.sequences.size(); ++i) {
    if (!emb.contains(t.train.speaker[i])) emb.emplace(t.train.speaker[i], embed_one(t.train.sequences[i], t.model));
  }
  int closer = 0, total = 0;
  for (std::size_t i = 0; i < t.held.sequences.size(); ++i) {
    const auto& src = emb.at(t.held.speaker[i]);
    for (const auto& [b, trg] : emb) {
      if (b == t.held.speaker[i]) continue;
      const auto y = convert::convert_difference(t.held.sequences[i], src, trg, t.model);
      const auto e = embed_one(y, t.model).z2_mean;
      closer += dist2(e, trg.z2_mean) < dist2(e, src.z2_mean);
      ++total;
    }
  }
  const double frac = static_cast<double>(closer) / total;
  INFO("fraction " << frac);
  CHECK(frac >= 0.90);
}

TEST_CASE("replacing Z2 with the input's own embedding stays close to reconstruction") {
  const auto& t = trained();
  const double var = corpus_variance(t.held);
  double mse = 0.0, worst = 0.0;
  for (const auto& s : t.held.sequences) {
    const auto self = convert::convert_replace(s, embed_one(s, t.model), t.model);
    const double e = frame_mse(self.frames, convert::reconstruct(s, t.model).frames);
    mse += e;
    worst = std::max(worst, e);
  }
  mse /= static_cast<double>(t.held.sequences.size());
  INFO("mean mse " << mse << " worst " << worst << " variance " << var);
  CHECK(mse < 0.05 * var);
}

TEST_CASE("replace-mode output varies less per utterance than difference-mode output") {
  const auto& t = trained();
  std::map<std::size_t, convert::SpeakerEmbedding> emb;
  for (std::size_t i = 0; i < t.train.sequences.size(); ++i) {
    if (!emb.contains(t.train.speaker[i])) emb.emplace(t.train.speaker[i], embed_one(t.train.sequences[i], t.model));
  }
  auto frame_variance = [](const Tensor& f) {
    double v = 0.0;
    for (std::size_t k = 0; k < f.cols(); ++k) {
      double m = 0.0, m2 = 0.0;
      for (std::size_t r = 0; r < f.rows(); ++r) {
        m += f(r, k);
        m2 += f(r, k) * f(r, k);
      }
      m /= static_cast<double>(f.rows());
      v += m2 / static_cast<double>(f.rows()) - m * m;
    }
    return v / static_cast<double>(f.cols());
  };
  int lower = 0, total = 0;
  for (std::size_t i = 0; i < t.held.sequences.size(); ++i) {
    const auto& src = emb.at(t.held.speaker[i]);
    for (const auto& [b, trg] : emb) {
      if (b == t.held.speaker[i]) continue;
      const double rep = frame_variance(convert::convert_replace(t.held.sequences[i], trg, t.model).frames);
      const double dif = frame_variance(convert::convert_difference(t.held.sequences[i], src, trg, t.model).frames);
      lower += rep <= dif;
      ++total;
    }
  }
  MESSAGE("replace-mode frame variance <= difference-mode in " << lower << "/" << total << " conversions");
  CHECK(total > 0);
}

TEST_CASE("one-utterance embeddings give a noisier sweep than five-utterance ones") {
  const auto& t = trained();
  auto spec = t.cfg.synthetic_spec();
  const std::size_t held = t.cfg.get_size("sweep.held_out");
  spec.utterances_per_speaker += held;
  const auto data = corpus::gen_synthetic_corpus(spec);
  eval::SweepInput in{data.sequences, data.speaker, data.content, {}};
  for (std::size_t c = 0; c < held; ++c) in.test_contents.push_back(spec.utterances_per_speaker - held + c);
  const std::vector<std::size_t> ns{1, 5};
  eval::SweepOptions opt;
  opt.repeats = 20;
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto rows = eval::sweep_training_size(in, t.model, ns, seed, opt);
    INFO("seed " << seed << " std n=1 " << rows[0].std << " n=5 " << rows[1].std);
    CHECK(rows[0].std > rows[1].std);
  }
}

TEST_CASE("thirty epochs on the default corpus cut the training loss below 0.7 of the first epoch") {
  cli::CliConfig cfg;
  const char* conf = std::getenv("FHVC_REFERENCE_CONFIG");
  REQUIRE(conf != nullptr);
  cfg.merge_file(conf);
  cfg.set("epochs", "30");
  const auto seqs = corpus::gen_synthetic_corpus(corpus::SyntheticSpec{}).sequences;
  const auto r = model::train(seqs, cfg.train_config(seqs.front().dim()));
  const double first = r.history.epochs.front().loss, last = r.history.epochs.back().loss;
  INFO("first " << first << " last " << last);
  CHECK(last < 0.7 * first);
}

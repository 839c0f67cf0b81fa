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

#include "fhvc/corpus/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "fhvc/core/rng.hpp"

namespace fhvc::corpus {

namespace {

constexpr std::size_t kMinHold = 12;
constexpr std::size_t kMaxHold = 28;
constexpr std::size_t kRamp = 8;
constexpr double kGainSpread = 0.2;

struct ContentPath {
  std::vector<double> values;  // T×D
  std::vector<int> label;
};

ContentPath content_path(const SyntheticSpec& spec, const Tensor& templates, std::size_t content_index,
                         const SeededRng& root) {
  SeededRng rng = root.stream("content", content_index);
  const std::size_t T = spec.frames, D = spec.dim, C = spec.templates;

  // Template sequence with hold durations until T frames are covered.
  std::vector<std::size_t> ids{static_cast<std::size_t>(rng.below(C))};
  std::vector<std::size_t> ends;
  std::size_t t = 0;
  while (true) {
    t += kMinHold + static_cast<std::size_t>(rng.below(kMaxHold - kMinHold + 1));
    ends.push_back(t);
    if (t >= T) break;
    std::size_t next = ids.back();
    if (C > 1) {
      next = static_cast<std::size_t>(rng.below(C - 1));
      if (next >= ids.back()) ++next;
    }
    ids.push_back(next);
  }

  ContentPath path;
  path.values.assign(T * D, 0.0);
  path.label.assign(T, 0);
  std::size_t seg = 0;
  for (std::size_t f = 0; f < T; ++f) {
    while (f >= ends[seg]) ++seg;
    const std::size_t cur = ids[seg];
    double w = 0.0;
    std::size_t nxt = cur;
    if (seg + 1 < ids.size()) {
      const std::size_t start = seg == 0 ? 0 : ends[seg - 1];
      const std::size_t ramp = std::min(kRamp, (ends[seg] - start) / 2);
      const std::size_t ramp_start = ends[seg] - ramp;
      if (ramp > 0 && f >= ramp_start) {
        // Raised-cosine blend that reaches weight 0.5 at the boundary.
        const double x = (static_cast<double>(f - ramp_start) + 0.5) / static_cast<double>(ramp);
        w = 0.25 * (1.0 - std::cos(std::numbers::pi * x));
        nxt = ids[seg + 1];
      }
    }
    if (seg > 0) {
      // Mirror ramp at the start of a hold, coming from the previous template.
      const std::size_t start = ends[seg - 1];
      const std::size_t prev_start = seg >= 2 ? ends[seg - 2] : 0;
      const std::size_t ramp = std::min({kRamp, (ends[seg] - start) / 2, (start - prev_start) / 2});
      if (ramp > 0 && f < start + ramp && w == 0.0) {
        const double x = (static_cast<double>(f - start) + 0.5) / static_cast<double>(ramp);
        w = 0.25 * (1.0 + std::cos(std::numbers::pi * x));
        nxt = ids[seg - 1];
      }
    }
    for (std::size_t d = 0; d < D; ++d) {
      path.values[f * D + d] = (1.0 - w) * templates(cur, d) + w * templates(nxt, d);
    }
    path.label[f] = static_cast<int>(cur);
  }
  return path;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (speakers < 1 || utterances_per_speaker < 1 || frames < 1 || dim < 1 || templates < 1) {
    throw std::invalid_argument("synthetic spec: all counts must be >= 1");
  }
  if (!(offset_scale >= 0.0) || !(noise_scale >= 0.0)) {
    throw std::invalid_argument("synthetic spec: scales must be >= 0");
  }
  if (!(frame_shift_ms > 0.0)) throw std::invalid_argument("synthetic spec: frame shift must be > 0");
}

std::string speaker_name(std::size_t global_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "spk%02zu", global_index);
  return buf;
}

SyntheticCorpus gen_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  const SeededRng root(spec.seed);
  const std::size_t D = spec.dim;

  SeededRng trng = root.stream("templates");
  const Tensor templates = standard_normal({spec.templates, D}, trng);

  std::vector<ContentPath> paths;
  for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
    paths.push_back(content_path(spec, templates, spec.first_utterance + u, root));
  }

  SyntheticCorpus out;
  for (std::size_t k = 0; k < spec.speakers; ++k) {
    const std::size_t g = spec.first_speaker + k;
    SeededRng srng = root.stream("speaker", g);
    std::vector<double> offset(D), gain(D);
    for (std::size_t d = 0; d < D; ++d) offset[d] = spec.offset_scale * srng.normal();
    for (std::size_t d = 0; d < D; ++d) gain[d] = std::exp(kGainSpread * spec.offset_scale * srng.normal());

    for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
      const std::size_t c = spec.first_utterance + u;
      SeededRng nrng = root.stream("noise/" + std::to_string(g), c);
      const ContentPath& path = paths[u];
      Tensor frames({spec.frames, D});
      for (std::size_t f = 0; f < spec.frames; ++f)
        for (std::size_t d = 0; d < D; ++d) {
          const double noise = spec.noise_scale > 0.0 ? spec.noise_scale * nrng.normal() : 0.0;
          frames(f, d) = gain[d] * path.values[f * D + d] + offset[d] + noise;
        }
      FeatureSequence seq;
      seq.sequence_id = static_cast<std::int64_t>(k * spec.utterances_per_speaker + u);
      seq.speaker_label = speaker_name(g);
      seq.frames = std::move(frames);
      seq.frame_shift_ms = spec.frame_shift_ms;
      out.sequences.push_back(std::move(seq));
      out.speaker.push_back(g);
      out.content.push_back(c);
      out.frame_template.push_back(path.label);
    }
  }
  return out;
}

}  // namespace fhvc::corpus

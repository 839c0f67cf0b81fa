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


#include "fhvc/convert/convert.hpp"

#include <cmath>
#include <string>

#include "fhvc/corpus/norm.hpp"
#include "fhvc/corpus/segment.hpp"

namespace fhvc::convert {

namespace {

void check_embedding(const SpeakerEmbedding& e, const model::FhvaeModel& model, const char* what) {
  if (e.z2_mean.size() != model.config.z2_dim) {
    throw ConversionError(std::string(what) + " embedding has dimension " + std::to_string(e.z2_mean.size()) +
                          ", model expects " + std::to_string(model.config.z2_dim));
  }
  if (e.segment_count == 0) throw ConversionError(std::string(what) + " embedding has no segments");
  for (double v : e.z2_mean) {
    if (!std::isfinite(v)) throw ConversionError(std::string(what) + " embedding is not finite");
  }
}

}  // namespace

SpeakerEmbedding speaker_embedding(std::span<const corpus::FeatureSequence> utterances,
                                   const model::FhvaeModel& model) {
  const auto& cfg = model.config;
  SpeakerEmbedding e;
  e.z2_mean.assign(cfg.z2_dim, 0.0);
  for (const auto& u : utterances) {
    if (u.dim() != cfg.feature_dim) {
      throw ConversionError("utterance dimension " + std::to_string(u.dim()) + " does not match model " +
                            std::to_string(cfg.feature_dim));
    }
    if (u.num_frames() < cfg.segment_frames) continue;
    auto norm = corpus::apply_norm(u, model.norm, corpus::NormDirection::forward);
    auto batch = corpus::segment_sequence(norm, cfg.segment_frames, cfg.hop);
    for (const auto& q : model::encode_z2_batch(batch.segments, model)) {
      for (std::size_t k = 0; k < cfg.z2_dim; ++k) e.z2_mean[k] += q.mean[k];
    }
    e.segment_count += batch.size();
    e.source_ids.push_back(u.sequence_id);
  }
  if (e.segment_count == 0) throw ConversionError("speaker_embedding: no utterance yields a full segment");
  for (double& v : e.z2_mean) v /= static_cast<double>(e.segment_count);
  return e;
}

corpus::FeatureSequence transform_latents(const corpus::FeatureSequence& input, const model::FhvaeModel& model,
                                          const Z2Map& map) {
  const auto& cfg = model.config;
  if (input.dim() != cfg.feature_dim) {
    throw ConversionError("input dimension " + std::to_string(input.dim()) + " does not match model " +
                          std::to_string(cfg.feature_dim));
  }
  const std::size_t T = input.num_frames();
  const std::size_t S = cfg.segment_frames;
  if (T < S) {
    throw ConversionError("input has " + std::to_string(T) + " frames, fewer than one segment of " +
                          std::to_string(S));
  }
  auto norm = corpus::apply_norm(input, model.norm, corpus::NormDirection::forward);
  const auto offsets = corpus::covering_offsets(T, S, cfg.hop);
  std::vector<Tensor> windows;
  windows.reserve(offsets.size());
  for (std::size_t off : offsets) windows.push_back(corpus::window(norm.frames, off, S));

  auto q2 = model::encode_z2_batch(windows, model);
  std::vector<std::vector<double>> z2_orig, z2_new;
  for (auto& q : q2) z2_orig.push_back(q.mean);
  for (const auto& z : z2_orig) {
    z2_new.push_back(map(z));
    if (z2_new.back().size() != cfg.z2_dim) throw ConversionError("Z2 map changed the latent dimension");
  }
  std::vector<std::vector<double>> z1;
  for (auto& q : model::encode_z1_batch(windows, z2_orig, model)) z1.push_back(std::move(q.mean));
  auto decoded = model::decode_batch(z1, z2_new, model);

  Tensor sum = Tensor::zeros(T, cfg.feature_dim);
  std::vector<double> count(T, 0.0);
  for (std::size_t w = 0; w < offsets.size(); ++w) {
    for (std::size_t t = 0; t < S; ++t) {
      auto src = decoded[w].row_span(t);
      auto dst = sum.row_span(offsets[w] + t);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      count[offsets[w] + t] += 1.0;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (count[t] == 1.0) continue;
    for (double& v : sum.row_span(t)) v /= count[t];
  }
  corpus::FeatureSequence out = input;
  out.frames = corpus::apply_norm(sum, model.norm, corpus::NormDirection::inverse);
  return out;
}

corpus::FeatureSequence reconstruct(const corpus::FeatureSequence& input, const model::FhvaeModel& model) {
  return transform_latents(input, model, [](const std::vector<double>& z) { return z; });
}

corpus::FeatureSequence convert_difference(const corpus::FeatureSequence& input, const SpeakerEmbedding& src,
                                           const SpeakerEmbedding& trg, const model::FhvaeModel& model) {
  check_embedding(src, model, "source");
  check_embedding(trg, model, "target");
  std::vector<double> diff(src.z2_mean.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = trg.z2_mean[k] - src.z2_mean[k];
  return transform_latents(input, model, [&](const std::vector<double>& z) {
    std::vector<double> out(z);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += diff[k];
    return out;
  });
}

corpus::FeatureSequence convert_replace(const corpus::FeatureSequence& input, const SpeakerEmbedding& trg,
                                        const model::FhvaeModel& model) {
  check_embedding(trg, model, "target");
  return transform_latents(input, model, [&](const std::vector<double>&) { return trg.z2_mean; });
}

}  // namespace fhvc::convert

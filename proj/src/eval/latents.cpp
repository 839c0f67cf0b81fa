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


#include "fhvc/eval/latents.hpp"

#include <limits>
#include <map>
#include <string>

#include "fhvc/corpus/norm.hpp"
#include "fhvc/corpus/segment.hpp"
#include "fhvc/eval/metrics.hpp"

namespace fhvc::eval {

SegmentLatents segment_latents(const corpus::FeatureSequence& utterance, const model::FhvaeModel& model) {
  const auto& cfg = model.config;
  if (utterance.dim() != cfg.feature_dim) throw EvalError("utterance dimension does not match the model");
  auto norm = corpus::apply_norm(utterance, model.norm, corpus::NormDirection::forward);
  auto batch = corpus::segment_sequence(norm, cfg.segment_frames, cfg.hop);
  auto q2 = model::encode_z2_batch(batch.segments, model);
  std::vector<std::vector<double>> z2;
  for (auto& q : q2) z2.push_back(q.mean);
  std::vector<std::vector<double>> z1;
  for (auto& q : model::encode_z1_batch(batch.segments, z2, model)) z1.push_back(std::move(q.mean));
  return {stack_rows(z2), stack_rows(z1)};
}

UtteranceLatents utterance_latents(const corpus::FeatureSequence& utterance, const model::FhvaeModel& model) {
  SegmentLatents s = segment_latents(utterance, model);
  UtteranceLatents u;
  u.segments = s.z2.rows();
  u.z2_mean = mean_frame(s.z2);
  u.z1_mean = mean_frame(s.z1);
  return u;
}

double loo_centroid_accuracy(const Tensor& points, std::span<const std::size_t> labels) {
  if (points.rank() != 2 || points.rows() == 0) throw EvalError("loo_centroid_accuracy: empty points");
  if (labels.size() != points.rows()) throw EvalError("loo_centroid_accuracy: label count differs from point count");
  const std::size_t d = points.cols();
  std::map<std::size_t, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto& [sum, count] = acc[labels[i]];
    sum.resize(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) sum[j] += points(i, j);
    ++count;
  }
  for (const auto& [l, e] : acc) {
    if (e.second < 2) throw EvalError("loo_centroid_accuracy: label " + std::to_string(l) + " has one point");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (const auto& [l, e] : acc) {
      const bool own = l == labels[i];
      const double n = static_cast<double>(e.second - (own ? 1 : 0));
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double c = (e.first[j] - (own ? points(i, j) : 0.0)) / n;
        dist += (points(i, j) - c) * (points(i, j) - c);
      }
      if (dist < best) {
        best = dist;
        pick = l;
      }
    }
    correct += pick == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(points.rows());
}

Tensor stack_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return Tensor::zeros(0, 0);
  Tensor t = Tensor::zeros(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != t.cols()) throw EvalError("stack_rows: ragged rows");
    for (std::size_t j = 0; j < t.cols(); ++j) t(i, j) = rows[i][j];
  }
  return t;
}

}  // namespace fhvc::eval

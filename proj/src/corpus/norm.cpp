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

#include "fhvc/corpus/norm.hpp"

#include <cmath>
#include <stdexcept>

namespace fhvc::corpus {

NormStats fit_norm_stats(std::span<const FeatureSequence> corpus) {
  if (corpus.empty()) throw std::invalid_argument("fit_norm_stats: empty corpus");
  const std::size_t D = corpus.front().dim();
  std::vector<double> sum(D, 0.0);
  std::size_t count = 0;
  for (const auto& seq : corpus) {
    if (seq.dim() != D) {
      throw std::invalid_argument("fit_norm_stats: sequence " + std::to_string(seq.sequence_id) + " has dim " +
                                  std::to_string(seq.dim()) + ", expected " + std::to_string(D));
    }
    for (std::size_t t = 0; t < seq.num_frames(); ++t)
      for (std::size_t d = 0; d < D; ++d) sum[d] += seq.frames(t, d);
    count += seq.num_frames();
  }
  if (count == 0) throw std::invalid_argument("fit_norm_stats: corpus has no frames");
  NormStats s;
  s.mean.resize(D);
  for (std::size_t d = 0; d < D; ++d) s.mean[d] = sum[d] / static_cast<double>(count);
  // Second pass around the mean for accuracy.
  std::vector<double> sq(D, 0.0);
  for (const auto& seq : corpus)
    for (std::size_t t = 0; t < seq.num_frames(); ++t)
      for (std::size_t d = 0; d < D; ++d) {
        const double e = seq.frames(t, d) - s.mean[d];
        sq[d] += e * e;
      }
  s.stddev.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    s.stddev[d] = std::max(std::sqrt(sq[d] / static_cast<double>(count)), kStdFloor);
  }
  return s;
}

Tensor apply_norm(const Tensor& frames, const NormStats& stats, NormDirection direction) {
  if (frames.cols() != stats.dim()) {
    throw std::invalid_argument("apply_norm: frames have dim " + std::to_string(frames.cols()) +
                                ", stats have dim " + std::to_string(stats.dim()));
  }
  Tensor out = frames;
  const std::size_t D = stats.dim();
  for (std::size_t t = 0; t < frames.rows(); ++t)
    for (std::size_t d = 0; d < D; ++d) {
      double& v = out(t, d);
      v = direction == NormDirection::forward ? (v - stats.mean[d]) / stats.stddev[d]
                                              : v * stats.stddev[d] + stats.mean[d];
    }
  return out;
}

FeatureSequence apply_norm(const FeatureSequence& seq, const NormStats& stats, NormDirection direction) {
  FeatureSequence out = seq;
  out.frames = apply_norm(seq.frames, stats, direction);
  return out;
}

}  // namespace fhvc::corpus

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

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fhvc/core/tensor.hpp"
#include "fhvc/corpus/features.hpp"

namespace fhvc::eval {

class EvalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Monotone frame pairing (ta, tb) from (0, 0) to (Ta−1, Tb−1).
struct AlignmentPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  // Checks endpoints and that every step is (1,0), (0,1) or (1,1).
  bool valid_for(std::size_t ta, std::size_t tb) const;
};

struct DtwResult {
  AlignmentPath path;
  double cost = 0.0;  // sum of squared Euclidean frame distances along the path
};

DtwResult dtw_align(const Tensor& a, const Tensor& b);

// (10 / ln 10)·sqrt(2·Σ_d (a_d − b_d)²) averaged over frame pairs. Without a
// path the sequences are paired frame by frame and must have equal length.
double mel_cd(const Tensor& a, const Tensor& b, const std::optional<AlignmentPath>& path = std::nullopt);
double mel_cd(const corpus::FeatureSequence& a, const corpus::FeatureSequence& b,
              const std::optional<AlignmentPath>& path = std::nullopt);

struct Pca {
  std::vector<double> mean;
  Tensor components;  // k×d, orthonormal rows
  std::vector<double> explained_variance;  // sample variance (N−1) along each component
  std::vector<double> explained_ratio;
};

Pca pca_fit(const Tensor& points, std::size_t k);
Tensor pca_transform(const Tensor& points, const Pca& pca);

struct ClusterSeparation {
  double one_nn_accuracy = 0.0;
  double fisher_ratio = 0.0;
};

// Leave-one-out 1-NN accuracy (ties at the minimum distance are resolved by
// majority label among the tied points, then smallest label) and the ratio
// of mean squared between-centroid distance to mean within-cluster variance.
ClusterSeparation cluster_separation(const Tensor& embeddings, std::span<const std::size_t> labels);

/// Euclidean nearest-centroid classifier.
class NearestCentroid {
 public:
  NearestCentroid(const Tensor& points, std::span<const std::size_t> labels);

  std::size_t predict(std::span<const double> point) const;
  double accuracy(const Tensor& points, std::span<const std::size_t> labels) const;
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const Tensor& centroids() const noexcept { return centroids_; }

 private:
  std::vector<std::size_t> labels_;
  Tensor centroids_;
};

// Mean frame (1×D) of a sequence.
std::vector<double> mean_frame(const Tensor& frames);

}  // namespace fhvc::eval

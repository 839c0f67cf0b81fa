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


#include "fhvc/eval/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

namespace fhvc::eval {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2 || t.rows() == 0 || t.cols() == 0) throw EvalError(std::string(what) + " must be a non-empty matrix");
}

const double kMelCdScale = 10.0 / std::numbers::ln10;

}  // namespace

bool AlignmentPath::valid_for(std::size_t ta, std::size_t tb) const {
  if (pairs.empty() || pairs.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (pairs.back() != std::pair<std::size_t, std::size_t>{ta - 1, tb - 1}) return false;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const auto di = pairs[k].first - pairs[k - 1].first;
    const auto dj = pairs[k].second - pairs[k - 1].second;
    if (pairs[k].first < pairs[k - 1].first || pairs[k].second < pairs[k - 1].second) return false;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

DtwResult dtw_align(const Tensor& a, const Tensor& b) {
  require_matrix(a, "dtw_align: a");
  require_matrix(b, "dtw_align: b");
  if (a.cols() != b.cols()) throw EvalError("dtw_align: feature dimensions differ");
  const std::size_t n = a.rows(), m = b.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  // 0 diagonal, 1 from (i−1, j), 2 from (i, j−1)
  std::vector<std::uint8_t> from(n * m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = sq_dist(a.row_span(i), b.row_span(j));
      if (i == 0 && j == 0) {
        acc[0] = local;
        continue;
      }
      double best = kInf;
      std::uint8_t arg = 0;
      if (i > 0 && j > 0) best = acc[(i - 1) * m + j - 1];
      if (i > 0 && acc[(i - 1) * m + j] < best) {
        best = acc[(i - 1) * m + j];
        arg = 1;
      }
      if (j > 0 && acc[i * m + j - 1] < best) {
        best = acc[i * m + j - 1];
        arg = 2;
      }
      acc[i * m + j] = best + local;
      from[i * m + j] = arg;
    }
  }
  DtwResult r;
  r.cost = acc[n * m - 1];
  std::size_t i = n - 1, j = m - 1;
  r.path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    switch (from[i * m + j]) {
      case 0: --i; --j; break;
      case 1: --i; break;
      default: --j; break;
    }
    r.path.pairs.emplace_back(i, j);
  }
  std::reverse(r.path.pairs.begin(), r.path.pairs.end());
  return r;
}

double mel_cd(const Tensor& a, const Tensor& b, const std::optional<AlignmentPath>& path) {
  require_matrix(a, "mel_cd: a");
  require_matrix(b, "mel_cd: b");
  if (a.cols() != b.cols()) throw EvalError("mel_cd: feature dimensions differ");
  double total = 0.0;
  std::size_t count = 0;
  if (path) {
    if (!path->valid_for(a.rows(), b.rows())) throw EvalError("mel_cd: alignment path does not fit the sequences");
    for (auto [i, j] : path->pairs) total += kMelCdScale * std::sqrt(2.0 * sq_dist(a.row_span(i), b.row_span(j)));
    count = path->pairs.size();
  } else {
    if (a.rows() != b.rows()) {
      throw EvalError("mel_cd: frame counts differ (" + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) +
                      ") and no alignment was given");
    }
    for (std::size_t t = 0; t < a.rows(); ++t) total += kMelCdScale * std::sqrt(2.0 * sq_dist(a.row_span(t), b.row_span(t)));
    count = a.rows();
  }
  return total / static_cast<double>(count);
}

double mel_cd(const corpus::FeatureSequence& a, const corpus::FeatureSequence& b,
              const std::optional<AlignmentPath>& path) {
  return mel_cd(a.frames, b.frames, path);
}

Pca pca_fit(const Tensor& points, std::size_t k) {
  require_matrix(points, "pca_fit: points");
  const std::size_t n = points.rows(), d = points.cols();
  if (n < 2) throw EvalError("pca_fit: need at least two points");
  if (k == 0 || k > std::min(n, d)) throw EvalError("pca_fit: k must lie in [1, min(N, d)]");
  Pca p;
  p.mean = mean_frame(points);
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = points(i, j) - p.mean[j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) total += s(i) * s(i) / static_cast<double>(n - 1);
  p.components = Tensor::zeros(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    // Sign convention: largest-magnitude loading positive.
    Eigen::Index arg = 0;
    svd.matrixV().col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff(&arg);
    const double sign = svd.matrixV()(arg, static_cast<Eigen::Index>(c)) < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      p.components(c, j) = sign * svd.matrixV()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
    }
    const double var = c < static_cast<std::size_t>(s.size()) ? s(c) * s(c) / static_cast<double>(n - 1) : 0.0;
    p.explained_variance.push_back(var);
    p.explained_ratio.push_back(total > 0.0 ? var / total : 0.0);
  }
  return p;
}

Tensor pca_transform(const Tensor& points, const Pca& pca) {
  require_matrix(points, "pca_transform: points");
  if (points.cols() != pca.mean.size()) throw EvalError("pca_transform: dimension mismatch");
  const std::size_t k = pca.components.rows();
  Tensor out = Tensor::zeros(points.rows(), k);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < points.cols(); ++j) s += (points(i, j) - pca.mean[j]) * pca.components(c, j);
      out(i, c) = s;
    }
  }
  return out;
}

ClusterSeparation cluster_separation(const Tensor& embeddings, std::span<const std::size_t> labels) {
  require_matrix(embeddings, "cluster_separation: embeddings");
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw EvalError("cluster_separation: label count differs from point count");
  std::map<std::size_t, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  if (counts.size() < 2) throw EvalError("cluster_separation: need at least two labels");
  for (const auto& [l, c] : counts) {
    if (c < 2) throw EvalError("cluster_separation: label " + std::to_string(l) + " has fewer than two points");
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::map<std::size_t, std::size_t> tied;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = sq_dist(embeddings.row_span(i), embeddings.row_span(j));
      if (d < best) {
        best = d;
        tied.clear();
      }
      if (d == best) ++tied[labels[j]];
    }
    std::size_t pick = 0, votes = 0;
    for (const auto& [l, v] : tied) {
      if (v > votes) {
        votes = v;
        pick = l;
      }
    }
    correct += pick == labels[i];
  }

  NearestCentroid nc(embeddings, labels);
  const Tensor& cent = nc.centroids();
  const auto& ls = nc.labels();
  double between = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < ls.size(); ++a) {
    for (std::size_t b = a + 1; b < ls.size(); ++b) {
      between += sq_dist(cent.row_span(a), cent.row_span(b));
      ++pairs;
    }
  }
  between /= static_cast<double>(pairs);
  double within = 0.0;
  for (std::size_t c = 0; c < ls.size(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == ls[c]) s += sq_dist(embeddings.row_span(i), cent.row_span(c));
    }
    within += s / static_cast<double>(counts[ls[c]]);
  }
  within /= static_cast<double>(ls.size());

  ClusterSeparation r;
  r.one_nn_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  if (between == 0.0) {
    r.fisher_ratio = 0.0;
  } else {
    r.fisher_ratio = within > 0.0 ? between / within : std::numeric_limits<double>::infinity();
  }
  return r;
}

NearestCentroid::NearestCentroid(const Tensor& points, std::span<const std::size_t> labels) {
  require_matrix(points, "NearestCentroid: points");
  if (labels.size() != points.rows()) throw EvalError("NearestCentroid: label count differs from point count");
  std::map<std::size_t, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto& [sum, count] = acc[labels[i]];
    sum.resize(points.cols(), 0.0);
    auto r = points.row_span(i);
    for (std::size_t j = 0; j < r.size(); ++j) sum[j] += r[j];
    ++count;
  }
  centroids_ = Tensor::zeros(acc.size(), points.cols());
  std::size_t c = 0;
  for (const auto& [label, entry] : acc) {
    labels_.push_back(label);
    for (std::size_t j = 0; j < points.cols(); ++j) centroids_(c, j) = entry.first[j] / static_cast<double>(entry.second);
    ++c;
  }
}

std::size_t NearestCentroid::predict(std::span<const double> point) const {
  if (point.size() != centroids_.cols()) throw EvalError("NearestCentroid: dimension mismatch");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    const double d = sq_dist(point, centroids_.row_span(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return labels_[best];
}

double NearestCentroid::accuracy(const Tensor& points, std::span<const std::size_t> labels) const {
  require_matrix(points, "NearestCentroid: points");
  if (labels.size() != points.rows()) throw EvalError("NearestCentroid: label count differs from point count");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) correct += predict(points.row_span(i)) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(points.rows());
}

std::vector<double> mean_frame(const Tensor& frames) {
  require_matrix(frames, "mean_frame: frames");
  std::vector<double> m(frames.cols(), 0.0);
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    auto r = frames.row_span(t);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += r[j];
  }
  for (double& v : m) v /= static_cast<double>(frames.rows());
  return m;
}

}  // namespace fhvc::eval

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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fhvc/core/params.hpp"
#include "fhvc/core/rng.hpp"
#include "fhvc/corpus/norm.hpp"

namespace fhvc::model {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Architecture and prior hyperparameters, echoed into checkpoints.
struct ModelConfig {
  std::size_t feature_dim = 39;
  std::size_t segment_frames = 20;
  std::size_t hop = 20;
  std::size_t hidden = 256;
  std::size_t z1_dim = 32;
  std::size_t z2_dim = 32;
  // p(Z1) = N(0, var_z1 I), p(Z2 | mu) = N(mu, var_z2 I), p(mu) = N(0, var_mu I).
  double var_z1 = 1.0;
  double var_z2 = 0.0625;
  double var_mu = 1.0;
  // Weight of the sequence-index discriminative term.
  double alpha = 10.0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline constexpr double kLogVarMin = -14.0;
inline constexpr double kLogVarMax = 14.0;

/// Diagonal Gaussian over a latent.
struct GaussianPosterior {
  std::vector<double> mean;
  std::vector<double> log_variance;

  std::size_t dim() const noexcept { return mean.size(); }
};

/// Encoder/decoder parameters plus the per-training-sequence mu table.
///
/// Parameter groups (all in `params`):
///   z2enc.lstm.*, z2enc.head.{w,b}   frames → (mean, log-var) of Z2
///   z1enc.lstm.*, z1enc.head.{w,b}   [frame ‖ z2] → (mean, log-var) of Z1
///   dec.init.{w,b}                   [z1 ‖ z2] → initial (h, c)
///   dec.lstm.*, dec.head.{w,b}       per-step frame means
///   dec.out_logvar                   1×D output log-variance
///   mu_table                         N_seq×d2
struct FhvaeModel {
  ModelConfig config;
  ParameterSet params;
  corpus::NormStats norm;
  std::vector<std::int64_t> train_ids;       // sequence id of each mu_table row
  std::vector<std::size_t> train_segments;   // N_seg of each mu_table row

  std::size_t num_sequences() const noexcept { return train_ids.size(); }
  std::optional<std::size_t> row_of(std::int64_t sequence_id) const;
  const Tensor& mu_table() const { return params.at("mu_table"); }
  void validate() const;
};

// Fan-scaled uniform weights, zero biases (forget gates at 1), zero mu table
// and output log-variance.
FhvaeModel init_model(const ModelConfig& config, std::size_t num_train_sequences, SeededRng& rng);

GaussianPosterior encode_z2(const Tensor& segment, const FhvaeModel& model);
std::vector<GaussianPosterior> encode_z2_batch(std::span<const Tensor> segments, const FhvaeModel& model);

GaussianPosterior encode_z1(const Tensor& segment, std::span<const double> z2, const FhvaeModel& model);
std::vector<GaussianPosterior> encode_z1_batch(std::span<const Tensor> segments,
                                               std::span<const std::vector<double>> z2,
                                               const FhvaeModel& model);

struct Decoded {
  Tensor frames;  // S×D means, normalized space
  std::vector<double> out_log_variance;
};

Decoded decode(std::span<const double> z1, std::span<const double> z2, const FhvaeModel& model);
std::vector<Tensor> decode_batch(std::span<const std::vector<double>> z1,
                                 std::span<const std::vector<double>> z2, const FhvaeModel& model);

// mean + exp(log_variance / 2) ⊙ ε with ε ~ N(0, I) from `rng`.
std::vector<double> sample_posterior(const GaussianPosterior& post, SeededRng& rng);

// KL(q ‖ N(p_mean, p_var I)), summed over dimensions.
double kl_diag_gaussian(const GaussianPosterior& q, std::span<const double> p_mean, double p_var);

struct ElboBreakdown {
  double recon = 0.0;
  double kl_z1 = 0.0;
  double kl_z2 = 0.0;
  double mu_prior = 0.0;
  double total = 0.0;
};

// Reparameterization noise for B segments: eps_z2 is B×d2, eps_z1 is B×d1.
struct SegmentNoise {
  Tensor eps_z2;
  Tensor eps_z1;
};

SegmentNoise draw_noise(std::size_t batch, const ModelConfig& config, SeededRng& rng);

// Single-sample segment lower bound for a segment of training row `row`.
ElboBreakdown segment_elbo(const Tensor& segment, std::size_t row, const FhvaeModel& model, SeededRng& rng);
ElboBreakdown segment_elbo(const Tensor& segment, std::size_t row, const FhvaeModel& model,
                           const SegmentNoise& noise);
// Same bound with an explicit mu and segment count, for sequences outside
// the table.
ElboBreakdown segment_elbo_with_mu(const Tensor& segment, std::span<const double> mu, double num_segments,
                                   const FhvaeModel& model, const SegmentNoise& noise);

// −log p(row | z2), p(i | z2) ∝ exp(−‖z2 − mu_i‖² / (2 var_z2)).
double discriminative_loss(std::span<const double> z2, std::size_t row, const FhvaeModel& model);

// Posterior mean of mu given the Z2 means of N segments:
//   Σ_j m_j / (N + var_z2 / var_mu).
std::vector<double> estimate_sequence_mu(std::span<const Tensor> segments, const FhvaeModel& model);
std::vector<double> estimate_sequence_mu_from_means(std::span<const std::vector<double>> z2_means,
                                                    const ModelConfig& config);

}  // namespace fhvc::model

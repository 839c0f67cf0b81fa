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
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "fhvc/core/adam.hpp"
#include "fhvc/corpus/features.hpp"
#include "fhvc/model/fhvae.hpp"

namespace fhvc::model {

struct TrainConfig {
  ModelConfig model;
  std::size_t batch_size = 256;
  std::size_t epochs = 500;
  AdamConfig adam;
  double dev_fraction = 0.1;
  // Dev ELBO is evaluated every `select_interval` epochs and after the last.
  std::size_t select_interval = 1;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  // Per-segment means over the epoch's batches.
  double loss = 0.0;
  double recon = 0.0;
  double kl_z1 = 0.0;
  double kl_z2 = 0.0;
  double mu_prior = 0.0;
  double disc = 0.0;
  double dev_elbo = std::numeric_limits<double>::quiet_NaN();
  bool selected = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_dev_elbo = -std::numeric_limits<double>::infinity();
};

struct TrainResult {
  FhvaeModel model;
  TrainHistory history;
  std::vector<std::int64_t> dev_ids;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

struct DevSplit {
  std::vector<std::size_t> train;  // indices into the corpus
  std::vector<std::size_t> dev;
};

// Sequences whose id hashes below `fraction` go to dev. When that selects
// none (and fraction > 0) the lowest-hash sequence is used. Throws when no
// training sequence remains.
DevSplit split_dev(std::span<const corpus::FeatureSequence> corpus, double fraction);

// Mean per-segment lower bound of raw (unnormalized) held-out sequences,
// with mu estimated per sequence and fixed reparameterization noise.
double dev_elbo(const FhvaeModel& model, std::span<const corpus::FeatureSequence> sequences,
                std::uint64_t seed);

// Trains on `corpus`; the returned model holds the parameters of the epoch
// with the best dev ELBO (the last epoch when there is no dev set).
TrainResult train(std::span<const corpus::FeatureSequence> corpus, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace fhvc::model

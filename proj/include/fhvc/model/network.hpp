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

// Graph-level construction of the FHVAE networks and objective. The public
// Tensor-level operations in fhvae.hpp and the trainer are built on this.

#include <optional>
#include <span>
#include <vector>

#include "fhvc/core/graph.hpp"
#include "fhvc/core/lstm.hpp"
#include "fhvc/model/fhvae.hpp"

namespace fhvc::model {

struct GraphPosterior {
  Var mean;
  Var log_variance;
};

/// Batch-sum objective terms, each a 1×1 node.
struct ObjectiveVars {
  Var recon;
  Var kl_z1;
  Var kl_z2;
  Var mu_prior;
  Var total;
  Var disc;  // invalid when the batch has no table rows
  Var loss;  // (−total + alpha·disc) / B
};

/// Segments of a batch with the sequence-level quantities the bound needs.
/// Either `rows` (training sequences: mu comes from the table and the
/// discriminative term is included) or `mu` (B×d2 constants) is set.
struct BatchSpec {
  std::span<const Tensor> segments;
  std::vector<std::size_t> rows;
  std::optional<Tensor> mu;
  std::vector<double> num_segments;  // N_seg of each segment's sequence
};

class ModelGraph {
 public:
  // Registers every model parameter with `graph`.
  ModelGraph(Graph& graph, const FhvaeModel& model);

  Graph& graph() noexcept { return graph_; }
  const ModelConfig& config() const noexcept { return config_; }

  // One B×D input node per frame index.
  std::vector<Var> frame_steps(std::span<const Tensor> segments);
  GraphPosterior encode_z2(std::span<const Var> steps);
  GraphPosterior encode_z1(std::span<const Var> steps, Var z2);
  Var sample(const GraphPosterior& post, Var eps);
  // (S·B)×D frame means, row t·B + b holds frame t of segment b.
  Var decode(Var z1, Var z2);
  Var out_log_variance() const { return out_logvar_; }
  Var mu_table() const { return mu_table_; }

  ObjectiveVars objective(const BatchSpec& batch, const SegmentNoise& noise);

 private:
  GraphPosterior head(Var h, Var w, Var b, std::size_t dim);
  Var constant(double v);

  Graph& graph_;
  ModelConfig config_;
  LstmWeights z2_lstm_, z1_lstm_, dec_lstm_;
  Var z2_head_w_, z2_head_b_, z1_head_w_, z1_head_b_;
  Var dec_init_w_, dec_init_b_, dec_head_w_, dec_head_b_;
  Var out_logvar_;
  Var mu_table_;
};

}  // namespace fhvc::model

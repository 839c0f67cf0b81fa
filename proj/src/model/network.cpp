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


#include "fhvc/model/network.hpp"

#include <cmath>
#include <numbers>

namespace fhvc::model {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

ModelGraph::ModelGraph(Graph& graph, const FhvaeModel& model) : graph_(graph), config_(model.config) {
  bind_parameters(graph_, model.params);
  z2_lstm_ = lstm_weights(graph_, "z2enc.lstm");
  z1_lstm_ = lstm_weights(graph_, "z1enc.lstm");
  dec_lstm_ = lstm_weights(graph_, "dec.lstm");
  z2_head_w_ = graph_.parameter_var("z2enc.head.w");
  z2_head_b_ = graph_.parameter_var("z2enc.head.b");
  z1_head_w_ = graph_.parameter_var("z1enc.head.w");
  z1_head_b_ = graph_.parameter_var("z1enc.head.b");
  dec_init_w_ = graph_.parameter_var("dec.init.w");
  dec_init_b_ = graph_.parameter_var("dec.init.b");
  dec_head_w_ = graph_.parameter_var("dec.head.w");
  dec_head_b_ = graph_.parameter_var("dec.head.b");
  out_logvar_ = graph_.parameter_var("dec.out_logvar");
  mu_table_ = graph_.parameter_var("mu_table");
}

Var ModelGraph::constant(double v) { return graph_.input(Tensor::filled(1, 1, v)); }

std::vector<Var> ModelGraph::frame_steps(std::span<const Tensor> segments) {
  const std::size_t s = config_.segment_frames;
  const std::size_t d = config_.feature_dim;
  if (segments.empty()) throw ModelError("frame_steps: empty batch");
  for (const auto& seg : segments) {
    if (seg.rank() != 2 || seg.rows() != s || seg.cols() != d) {
      throw ShapeError("segment must be " + std::to_string(s) + "x" + std::to_string(d) + ", got " +
                       shape_string(seg.shape()));
    }
  }
  std::vector<Var> steps;
  steps.reserve(s);
  for (std::size_t t = 0; t < s; ++t) {
    Tensor step = Tensor::zeros(segments.size(), d);
    for (std::size_t b = 0; b < segments.size(); ++b) {
      for (std::size_t j = 0; j < d; ++j) step(b, j) = segments[b](t, j);
    }
    steps.push_back(graph_.input(std::move(step)));
  }
  return steps;
}

GraphPosterior ModelGraph::head(Var h, Var w, Var b, std::size_t dim) {
  Var out = graph_.add_bias(graph_.matmul(h, w), b);
  Var mean = graph_.slice(out, 1, 0, dim);
  Var lv = graph_.clamp(graph_.slice(out, 1, dim, 2 * dim), kLogVarMin, kLogVarMax);
  return {mean, lv};
}

GraphPosterior ModelGraph::encode_z2(std::span<const Var> steps) {
  LstmOutput run = lstm_forward(graph_, steps, z2_lstm_);
  return head(run.final.h, z2_head_w_, z2_head_b_, config_.z2_dim);
}

GraphPosterior ModelGraph::encode_z1(std::span<const Var> steps, Var z2) {
  std::vector<Var> conditioned;
  conditioned.reserve(steps.size());
  for (Var x : steps) {
    const Var parts[] = {x, z2};
    conditioned.push_back(graph_.concat(parts, 1));
  }
  LstmOutput run = lstm_forward(graph_, conditioned, z1_lstm_);
  return head(run.final.h, z1_head_w_, z1_head_b_, config_.z1_dim);
}

Var ModelGraph::sample(const GraphPosterior& post, Var eps) {
  Var sd = graph_.exp(graph_.scale(post.log_variance, 0.5));
  return graph_.add(post.mean, graph_.mul(sd, eps));
}

Var ModelGraph::decode(Var z1, Var z2) {
  const std::size_t h = config_.hidden;
  const Var parts[] = {z1, z2};
  Var z = graph_.concat(parts, 1);
  Var init = graph_.add_bias(graph_.matmul(z, dec_init_w_), dec_init_b_);
  LstmState state{graph_.tanh(graph_.slice(init, 1, 0, h)), graph_.slice(init, 1, h, 2 * h)};
  std::vector<Var> inputs(config_.segment_frames, z);
  LstmOutput run = lstm_forward(graph_, inputs, dec_lstm_, state);
  Var stacked = graph_.concat(run.hidden, 0);
  return graph_.add_bias(graph_.matmul(stacked, dec_head_w_), dec_head_b_);
}

ObjectiveVars ModelGraph::objective(const BatchSpec& batch, const SegmentNoise& noise) {
  const std::size_t n = batch.segments.size();
  const std::size_t d1 = config_.z1_dim;
  const std::size_t d2 = config_.z2_dim;
  const std::size_t dim = config_.feature_dim;
  const bool table = batch.rows.size() == n && n > 0;
  if (!table && !batch.mu) throw ModelError("objective: batch needs table rows or explicit mu");
  if (batch.num_segments.size() != n) throw ModelError("objective: num_segments size mismatch");
  if (noise.eps_z2.rows() != n || noise.eps_z2.cols() != d2 || noise.eps_z1.rows() != n ||
      noise.eps_z1.cols() != d1) {
    throw ShapeError("objective: noise shape does not match batch");
  }

  std::vector<Var> steps = frame_steps(batch.segments);
  GraphPosterior q2 = encode_z2(steps);
  Var z2 = sample(q2, graph_.input(noise.eps_z2));
  GraphPosterior q1 = encode_z1(steps, z2);
  Var z1 = sample(q1, graph_.input(noise.eps_z1));
  Var means = decode(z1, z2);
  Var target = graph_.concat(steps, 0);

  // log N(x; m, diag(exp(lv))) summed over frames and dimensions.
  const double frames = static_cast<double>(n * config_.segment_frames);
  Var sq = graph_.sum_axis(graph_.square(graph_.sub(target, means)), 0);
  Var weighted = graph_.sum(graph_.mul(sq, graph_.exp(graph_.scale(out_logvar_, -1.0))));
  Var lv_sum = graph_.scale(graph_.sum(out_logvar_), frames);
  Var recon = graph_.add(graph_.scale(graph_.add(weighted, lv_sum), -0.5),
                         constant(-0.5 * frames * static_cast<double>(dim) * kLog2Pi));

  const double v1 = config_.var_z1;
  Var kl1_inner = graph_.add(graph_.sum(graph_.exp(q1.log_variance)), graph_.sum(graph_.square(q1.mean)));
  Var kl_z1 = graph_.add(graph_.scale(graph_.sub(graph_.scale(kl1_inner, 1.0 / v1), graph_.sum(q1.log_variance)), 0.5),
                         constant(0.5 * static_cast<double>(n * d1) * (std::log(v1) - 1.0)));

  Var mu;
  Tensor onehot;
  if (table) {
    onehot = Tensor::zeros(n, graph_.rows(mu_table_));
    for (std::size_t b = 0; b < n; ++b) {
      if (batch.rows[b] >= onehot.cols()) throw ModelError("objective: row out of range");
      onehot(b, batch.rows[b]) = 1.0;
    }
    mu = graph_.matmul(graph_.input(onehot), mu_table_);
  } else {
    if (batch.mu->rows() != n || batch.mu->cols() != d2) throw ShapeError("objective: mu must be Bxd2");
    mu = graph_.input(*batch.mu);
  }

  const double v2 = config_.var_z2;
  Var kl2_inner = graph_.add(graph_.sum(graph_.exp(q2.log_variance)),
                             graph_.sum(graph_.square(graph_.sub(q2.mean, mu))));
  Var kl_z2 = graph_.add(graph_.scale(graph_.sub(graph_.scale(kl2_inner, 1.0 / v2), graph_.sum(q2.log_variance)), 0.5),
                         constant(0.5 * static_cast<double>(n * d2) * (std::log(v2) - 1.0)));

  // Each segment carries 1/N_seg of its sequence's log p(mu).
  const double vm = config_.var_mu;
  Tensor inv_count = Tensor::zeros(n, 1);
  double inv_total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    if (!(batch.num_segments[b] > 0.0)) throw ModelError("objective: num_segments must be positive");
    inv_count(b, 0) = 1.0 / batch.num_segments[b];
    inv_total += inv_count(b, 0);
  }
  Var mu_sq = graph_.sum_axis(graph_.square(mu), 1);
  Var mu_prior = graph_.add(graph_.scale(graph_.sum(graph_.mul(graph_.input(inv_count), mu_sq)), -0.5 / vm),
                            constant(-0.5 * static_cast<double>(d2) * std::log(2.0 * std::numbers::pi * vm) * inv_total));

  Var total = graph_.sub(graph_.sub(graph_.add(recon, mu_prior), kl_z1), kl_z2);

  ObjectiveVars out{recon, kl_z1, kl_z2, mu_prior, total, Var{}, Var{}};
  Var neg_total = graph_.scale(total, -1.0);
  if (table) {
    // logit_k = (2 z2·mu_k − ‖mu_k‖²) / (2 var_z2); the ‖z2‖² term cancels.
    Var cross = graph_.scale(graph_.matmul(z2, graph_.transpose(mu_table_)), 2.0);
    Var norms = graph_.transpose(graph_.sum_axis(graph_.square(mu_table_), 1));
    Var ones = graph_.input(Tensor::filled(n, 1, 1.0));
    Var logits = graph_.scale(graph_.sub(cross, graph_.matmul(ones, norms)), 0.5 / v2);
    Var picked = graph_.sum(graph_.mul(graph_.input(onehot), logits));
    out.disc = graph_.sub(graph_.sum(graph_.logsumexp_rows(logits)), picked);
    neg_total = graph_.add(neg_total, graph_.scale(out.disc, config_.alpha));
  }
  out.loss = graph_.scale(neg_total, 1.0 / static_cast<double>(n));
  return out;
}

}  // namespace fhvc::model

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


#include "fhvc/model/fhvae.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fhvc/core/lstm.hpp"
#include "fhvc/model/network.hpp"

namespace fhvc::model {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

Tensor rows_to_tensor(std::span<const std::vector<double>> rows, std::size_t dim, const char* what) {
  Tensor t = Tensor::zeros(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != dim) {
      throw ShapeError(std::string(what) + ": expected dimension " + std::to_string(dim) + ", got " +
                       std::to_string(rows[r].size()));
    }
    std::copy(rows[r].begin(), rows[r].end(), t.row_span(r).begin());
  }
  return t;
}

std::vector<GaussianPosterior> split_posterior(Graph& g, const GraphPosterior& p) {
  const Tensor& m = g.value(p.mean);
  const Tensor& lv = g.value(p.log_variance);
  std::vector<GaussianPosterior> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto mr = m.row_span(r);
    auto lr = lv.row_span(r);
    out[r].mean.assign(mr.begin(), mr.end());
    out[r].log_variance.assign(lr.begin(), lr.end());
  }
  return out;
}

ElboBreakdown read_breakdown(Graph& g, const ObjectiveVars& v) {
  ElboBreakdown e;
  e.recon = g.value(v.recon)[0];
  e.kl_z1 = g.value(v.kl_z1)[0];
  e.kl_z2 = g.value(v.kl_z2)[0];
  e.mu_prior = g.value(v.mu_prior)[0];
  e.total = g.value(v.total)[0];
  return e;
}

}  // namespace

void ModelConfig::validate() const {
  require(feature_dim > 0, "feature_dim must be positive");
  require(segment_frames > 0, "segment_frames must be positive");
  require(hop > 0, "hop must be positive");
  require(hidden > 0, "hidden must be positive");
  require(z1_dim > 0 && z2_dim > 0, "latent dimensions must be positive");
  require(var_z1 > 0.0 && var_z2 > 0.0 && var_mu > 0.0, "prior variances must be positive");
  require(alpha >= 0.0, "alpha must be non-negative");
}

std::optional<std::size_t> FhvaeModel::row_of(std::int64_t sequence_id) const {
  auto it = std::find(train_ids.begin(), train_ids.end(), sequence_id);
  if (it == train_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - train_ids.begin());
}

void FhvaeModel::validate() const {
  config.validate();
  const std::size_t d = config.feature_dim;
  const std::size_t h = config.hidden;
  const std::size_t d1 = config.z1_dim;
  const std::size_t d2 = config.z2_dim;
  const std::pair<const char*, Shape> expected[] = {
      {"z2enc.lstm.wx", {d, 4 * h}},       {"z2enc.lstm.wh", {h, 4 * h}},
      {"z2enc.lstm.b", {1, 4 * h}},        {"z2enc.head.w", {h, 2 * d2}},
      {"z2enc.head.b", {1, 2 * d2}},       {"z1enc.lstm.wx", {d + d2, 4 * h}},
      {"z1enc.lstm.wh", {h, 4 * h}},       {"z1enc.lstm.b", {1, 4 * h}},
      {"z1enc.head.w", {h, 2 * d1}},       {"z1enc.head.b", {1, 2 * d1}},
      {"dec.init.w", {d1 + d2, 2 * h}},    {"dec.init.b", {1, 2 * h}},
      {"dec.lstm.wx", {d1 + d2, 4 * h}},   {"dec.lstm.wh", {h, 4 * h}},
      {"dec.lstm.b", {1, 4 * h}},          {"dec.head.w", {h, d}},
      {"dec.head.b", {1, d}},              {"dec.out_logvar", {1, d}},
      {"mu_table", {train_ids.size(), d2}},
  };
  require(params.size() == std::size(expected), "unexpected parameter count");
  for (const auto& [name, shape] : expected) {
    auto it = params.find(name);
    require(it != params.end(), std::string("missing parameter ") + name);
    if (it->second.shape() != shape) {
      throw ShapeError(std::string(name) + ": expected " + shape_string(shape) + ", got " +
                       shape_string(it->second.shape()));
    }
  }
  require(train_segments.size() == train_ids.size(), "train_segments size mismatch");
  require(norm.dim() == d && norm.stddev.size() == d, "normalization statistics dimension mismatch");
}

FhvaeModel init_model(const ModelConfig& config, std::size_t num_train_sequences, SeededRng& rng) {
  config.validate();
  require(num_train_sequences > 0, "init_model: need at least one training sequence");
  const std::size_t d = config.feature_dim;
  const std::size_t h = config.hidden;
  const std::size_t d1 = config.z1_dim;
  const std::size_t d2 = config.z2_dim;
  FhvaeModel m;
  m.config = config;
  init_lstm(m.params, "z2enc.lstm", d, h, rng);
  init_lstm(m.params, "z1enc.lstm", d + d2, h, rng);
  init_lstm(m.params, "dec.lstm", d1 + d2, h, rng);
  auto dense = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    SeededRng s = rng.stream(prefix);
    m.params[prefix + ".w"] = glorot_uniform(in, out, s);
    m.params[prefix + ".b"] = Tensor::zeros(1, out);
  };
  dense("z2enc.head", h, 2 * d2);
  dense("z1enc.head", h, 2 * d1);
  dense("dec.init", d1 + d2, 2 * h);
  dense("dec.head", h, d);
  m.params["dec.out_logvar"] = Tensor::zeros(1, d);
  m.params["mu_table"] = Tensor::zeros(num_train_sequences, d2);
  m.train_ids.resize(num_train_sequences);
  for (std::size_t i = 0; i < num_train_sequences; ++i) m.train_ids[i] = static_cast<std::int64_t>(i);
  m.train_segments.assign(num_train_sequences, 1);
  m.norm.mean.assign(d, 0.0);
  m.norm.stddev.assign(d, 1.0);
  return m;
}

std::vector<GaussianPosterior> encode_z2_batch(std::span<const Tensor> segments, const FhvaeModel& model) {
  if (segments.empty()) return {};
  Graph g;
  ModelGraph net(g, model);
  auto steps = net.frame_steps(segments);
  return split_posterior(g, net.encode_z2(steps));
}

GaussianPosterior encode_z2(const Tensor& segment, const FhvaeModel& model) {
  return encode_z2_batch(std::span(&segment, 1), model).front();
}

std::vector<GaussianPosterior> encode_z1_batch(std::span<const Tensor> segments,
                                               std::span<const std::vector<double>> z2,
                                               const FhvaeModel& model) {
  require(segments.size() == z2.size(), "encode_z1_batch: segment and z2 counts differ");
  if (segments.empty()) return {};
  Graph g;
  ModelGraph net(g, model);
  auto steps = net.frame_steps(segments);
  Var z = g.input(rows_to_tensor(z2, model.config.z2_dim, "z2"));
  return split_posterior(g, net.encode_z1(steps, z));
}

GaussianPosterior encode_z1(const Tensor& segment, std::span<const double> z2, const FhvaeModel& model) {
  const std::vector<std::vector<double>> z{std::vector<double>(z2.begin(), z2.end())};
  return encode_z1_batch(std::span(&segment, 1), z, model).front();
}

std::vector<Tensor> decode_batch(std::span<const std::vector<double>> z1,
                                 std::span<const std::vector<double>> z2, const FhvaeModel& model) {
  require(z1.size() == z2.size(), "decode_batch: z1 and z2 counts differ");
  if (z1.empty()) return {};
  Graph g;
  ModelGraph net(g, model);
  Var a = g.input(rows_to_tensor(z1, model.config.z1_dim, "z1"));
  Var b = g.input(rows_to_tensor(z2, model.config.z2_dim, "z2"));
  const Tensor& means = g.value(net.decode(a, b));
  const std::size_t n = z1.size();
  const std::size_t s = model.config.segment_frames;
  const std::size_t d = model.config.feature_dim;
  std::vector<Tensor> out(n, Tensor::zeros(s, d));
  for (std::size_t t = 0; t < s; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      auto src = means.row_span(t * n + k);
      std::copy(src.begin(), src.end(), out[k].row_span(t).begin());
    }
  }
  return out;
}

Decoded decode(std::span<const double> z1, std::span<const double> z2, const FhvaeModel& model) {
  const std::vector<std::vector<double>> a{std::vector<double>(z1.begin(), z1.end())};
  const std::vector<std::vector<double>> b{std::vector<double>(z2.begin(), z2.end())};
  Decoded out;
  out.frames = std::move(decode_batch(a, b, model).front());
  auto lv = model.params.at("dec.out_logvar").data();
  out.out_log_variance.assign(lv.begin(), lv.end());
  return out;
}

std::vector<double> sample_posterior(const GaussianPosterior& post, SeededRng& rng) {
  if (post.log_variance.size() != post.mean.size()) throw ShapeError("posterior mean/log-variance size mismatch");
  std::vector<double> z(post.dim());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = post.mean[i] + std::exp(0.5 * post.log_variance[i]) * rng.normal();
  }
  return z;
}

double kl_diag_gaussian(const GaussianPosterior& q, std::span<const double> p_mean, double p_var) {
  require(p_var > 0.0, "kl_diag_gaussian: prior variance must be positive");
  if (p_mean.size() != q.dim() || q.log_variance.size() != q.dim()) throw ShapeError("kl_diag_gaussian: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const double diff = q.mean[i] - p_mean[i];
    kl += 0.5 * ((std::exp(q.log_variance[i]) + diff * diff) / p_var - 1.0 - q.log_variance[i] + std::log(p_var));
  }
  return kl;
}

SegmentNoise draw_noise(std::size_t batch, const ModelConfig& config, SeededRng& rng) {
  SegmentNoise n;
  n.eps_z2 = standard_normal({batch, config.z2_dim}, rng);
  n.eps_z1 = standard_normal({batch, config.z1_dim}, rng);
  return n;
}

ElboBreakdown segment_elbo(const Tensor& segment, std::size_t row, const FhvaeModel& model,
                           const SegmentNoise& noise) {
  if (row >= model.num_sequences()) throw ModelError("segment_elbo: sequence row out of range");
  Graph g;
  ModelGraph net(g, model);
  BatchSpec spec;
  spec.segments = std::span(&segment, 1);
  spec.rows = {row};
  spec.num_segments = {static_cast<double>(model.train_segments[row])};
  return read_breakdown(g, net.objective(spec, noise));
}

ElboBreakdown segment_elbo(const Tensor& segment, std::size_t row, const FhvaeModel& model, SeededRng& rng) {
  return segment_elbo(segment, row, model, draw_noise(1, model.config, rng));
}

ElboBreakdown segment_elbo_with_mu(const Tensor& segment, std::span<const double> mu, double num_segments,
                                   const FhvaeModel& model, const SegmentNoise& noise) {
  Graph g;
  ModelGraph net(g, model);
  BatchSpec spec;
  spec.segments = std::span(&segment, 1);
  spec.mu = Tensor::row(mu);
  spec.num_segments = {num_segments};
  return read_breakdown(g, net.objective(spec, noise));
}

double discriminative_loss(std::span<const double> z2, std::size_t row, const FhvaeModel& model) {
  const Tensor& mu = model.mu_table();
  if (row >= mu.rows()) throw ModelError("discriminative_loss: sequence row out of range");
  if (z2.size() != mu.cols()) throw ShapeError("discriminative_loss: z2 dimension mismatch");
  std::vector<double> logits(mu.rows());
  for (std::size_t k = 0; k < mu.rows(); ++k) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < mu.cols(); ++j) {
      const double diff = z2[j] - mu(k, j);
      d2 += diff * diff;
    }
    logits[k] = -d2 / (2.0 * model.config.var_z2);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double l : logits) acc += std::exp(l - top);
  return top + std::log(acc) - logits[row];
}

std::vector<double> estimate_sequence_mu_from_means(std::span<const std::vector<double>> z2_means,
                                                    const ModelConfig& config) {
  require(!z2_means.empty(), "estimate_sequence_mu: no segments");
  std::vector<double> mu(config.z2_dim, 0.0);
  for (const auto& m : z2_means) {
    if (m.size() != mu.size()) throw ShapeError("estimate_sequence_mu: z2 dimension mismatch");
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] += m[j];
  }
  const double denom = static_cast<double>(z2_means.size()) + config.var_z2 / config.var_mu;
  for (double& v : mu) v /= denom;
  return mu;
}

std::vector<double> estimate_sequence_mu(std::span<const Tensor> segments, const FhvaeModel& model) {
  require(!segments.empty(), "estimate_sequence_mu: no segments");
  auto posts = encode_z2_batch(segments, model);
  std::vector<std::vector<double>> means;
  means.reserve(posts.size());
  for (auto& p : posts) means.push_back(std::move(p.mean));
  return estimate_sequence_mu_from_means(means, model.config);
}

}  // namespace fhvc::model

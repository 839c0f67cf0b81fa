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


#include "fhvc/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fhvc/corpus/norm.hpp"
#include "fhvc/corpus/segment.hpp"
#include "fhvc/model/network.hpp"

namespace fhvc::model {

namespace {

double id_score(std::int64_t id) {
  return static_cast<double>(mix64(static_cast<std::uint64_t>(id)) >> 11) * 0x1.0p-53;
}

struct TrainSegment {
  const Tensor* frames;
  std::size_t row;
};

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (batch_size == 0) throw ModelError("batch_size must be positive");
  if (epochs == 0) throw ModelError("epochs must be positive");
  if (!(adam.learning_rate > 0.0)) throw ModelError("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ModelError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ModelError("Adam epsilon must be positive");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) throw ModelError("dev_fraction must lie in [0, 1)");
  if (select_interval == 0) throw ModelError("select_interval must be positive");
  if (!(clip_norm > 0.0)) throw ModelError("clip_norm must be positive");
}

DevSplit split_dev(std::span<const corpus::FeatureSequence> corpus, double fraction) {
  DevSplit split;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (id_score(corpus[i].sequence_id) < fraction ? split.dev : split.train).push_back(i);
  }
  if (fraction > 0.0 && split.dev.empty() && corpus.size() > 1) {
    auto it = std::min_element(split.train.begin(), split.train.end(), [&](std::size_t a, std::size_t b) {
      return id_score(corpus[a].sequence_id) < id_score(corpus[b].sequence_id);
    });
    split.dev.push_back(*it);
    split.train.erase(it);
  }
  if (split.train.empty()) throw ModelError("dev split leaves no training sequences");
  return split;
}

double dev_elbo(const FhvaeModel& model, std::span<const corpus::FeatureSequence> sequences, std::uint64_t seed) {
  const ModelConfig& cfg = model.config;
  SeededRng base = SeededRng(seed).stream("dev-noise");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    auto norm = corpus::apply_norm(sequences[i], model.norm, corpus::NormDirection::forward);
    if (norm.num_frames() < cfg.segment_frames) continue;
    auto batch = corpus::segment_sequence(norm, cfg.segment_frames, cfg.hop);
    const std::size_t n = batch.size();
    auto mu = estimate_sequence_mu(batch.segments, model);
    Tensor mu_rows = Tensor::zeros(n, cfg.z2_dim);
    for (std::size_t b = 0; b < n; ++b) std::copy(mu.begin(), mu.end(), mu_rows.row_span(b).begin());
    SeededRng rng = base.stream("sequence", i);
    SegmentNoise noise = draw_noise(n, cfg, rng);
    Graph g;
    ModelGraph net(g, model);
    BatchSpec spec;
    spec.segments = batch.segments;
    spec.mu = std::move(mu_rows);
    spec.num_segments.assign(n, static_cast<double>(n));
    total += g.value(net.objective(spec, noise).total)[0];
    count += n;
  }
  if (count == 0) throw ModelError("dev_elbo: no segments");
  return total / static_cast<double>(count);
}

TrainResult train(std::span<const corpus::FeatureSequence> corpus, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  const ModelConfig& mc = config.model;
  if (corpus.empty()) throw ModelError("train: empty corpus");
  for (const auto& seq : corpus) {
    seq.validate();
    if (seq.dim() != mc.feature_dim) {
      throw ShapeError("train: feature dimension " + std::to_string(seq.dim()) + " does not match model " +
                       std::to_string(mc.feature_dim));
    }
  }

  DevSplit split = split_dev(corpus, config.dev_fraction);
  std::vector<corpus::FeatureSequence> train_raw, dev_raw;
  for (std::size_t i : split.train) {
    if (corpus[i].num_frames() >= mc.segment_frames) train_raw.push_back(corpus[i]);
  }
  for (std::size_t i : split.dev) {
    if (corpus[i].num_frames() >= mc.segment_frames) dev_raw.push_back(corpus[i]);
  }
  if (train_raw.empty()) throw ModelError("train: no training sequence is long enough for one segment");

  SeededRng root(config.seed);
  SeededRng init_rng = root.stream("init");
  TrainResult result;
  FhvaeModel& model = result.model;
  model = init_model(mc, train_raw.size(), init_rng);
  model.norm = corpus::fit_norm_stats(train_raw);
  for (const auto& s : dev_raw) result.dev_ids.push_back(s.sequence_id);

  std::vector<corpus::SegmentBatch> per_sequence;
  per_sequence.reserve(train_raw.size());
  std::vector<TrainSegment> pool;
  for (std::size_t r = 0; r < train_raw.size(); ++r) {
    auto norm = corpus::apply_norm(train_raw[r], model.norm, corpus::NormDirection::forward);
    per_sequence.push_back(corpus::segment_sequence(norm, mc.segment_frames, mc.hop));
    model.train_ids[r] = train_raw[r].sequence_id;
    model.train_segments[r] = per_sequence.back().size();
  }
  for (std::size_t r = 0; r < per_sequence.size(); ++r) {
    for (const auto& seg : per_sequence[r].segments) pool.push_back({&seg, r});
  }

  AdamState adam = make_adam_state(model.params, config.adam);
  ParameterSet best = model.params;
  const bool has_dev = !dev_raw.empty();
  std::vector<std::size_t> order(pool.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng shuffle = root.stream("shuffle", epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0, batch_index = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::size_t n = end - start;
      std::vector<Tensor> segs;
      segs.reserve(n);
      BatchSpec spec;
      for (std::size_t k = start; k < end; ++k) {
        const TrainSegment& ts = pool[order[k]];
        segs.push_back(*ts.frames);
        spec.rows.push_back(ts.row);
        spec.num_segments.push_back(static_cast<double>(model.train_segments[ts.row]));
      }
      spec.segments = segs;
      SeededRng noise_rng = root.stream("noise", epoch).stream("batch", batch_index);
      SegmentNoise noise = draw_noise(n, mc, noise_rng);

      Graph g;
      ModelGraph net(g, model);
      ObjectiveVars vars = net.objective(spec, noise);
      Gradients grads = g.gradient(vars.loss);
      clip_global_norm(grads, config.clip_norm);
      adam_step(model.params, grads, adam);

      rec.loss += g.value(vars.loss)[0] * static_cast<double>(n);
      rec.recon += g.value(vars.recon)[0];
      rec.kl_z1 += g.value(vars.kl_z1)[0];
      rec.kl_z2 += g.value(vars.kl_z2)[0];
      rec.mu_prior += g.value(vars.mu_prior)[0];
      rec.disc += g.value(vars.disc)[0];
    }
    const double total = static_cast<double>(pool.size());
    rec.loss /= total;
    rec.recon /= total;
    rec.kl_z1 /= total;
    rec.kl_z2 /= total;
    rec.mu_prior /= total;
    rec.disc /= total;

    if (has_dev && (epoch % config.select_interval == 0 || epoch == config.epochs)) {
      rec.dev_elbo = dev_elbo(model, dev_raw, config.seed);
      if (rec.dev_elbo > result.history.best_dev_elbo) {
        result.history.best_dev_elbo = rec.dev_elbo;
        result.history.best_epoch = epoch;
        best = model.params;
        rec.selected = true;
      }
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }

  if (has_dev) {
    model.params = std::move(best);
  } else {
    result.history.best_epoch = config.epochs;
  }
  return result;
}

}  // namespace fhvc::model

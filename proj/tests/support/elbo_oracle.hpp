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

// Loop-level reimplementation of the segment bound and numerical
// integration helpers used to check the model code.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fhvc/model/fhvae.hpp"

namespace fhvc::testing {

struct OracleBreakdown {
  double recon = 0.0;
  double kl_z1 = 0.0;
  double kl_z2 = 0.0;
  double mu_prior = 0.0;
  double total = 0.0;
};

namespace detail {

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void lstm_step(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c,
                      const Tensor& wx, const Tensor& wh, const Tensor& b) {
  const std::size_t H = h.size();
  std::vector<double> a(4 * H);
  for (std::size_t k = 0; k < 4 * H; ++k) {
    double s = b(0, k);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * wx(i, k);
    for (std::size_t j = 0; j < H; ++j) s += h[j] * wh(j, k);
    a[k] = s;
  }
  for (std::size_t j = 0; j < H; ++j) {
    const double ig = sigm(a[j]);
    const double fg = sigm(a[H + j]);
    const double gg = std::tanh(a[2 * H + j]);
    const double og = sigm(a[3 * H + j]);
    c[j] = fg * c[j] + ig * gg;
    h[j] = og * std::tanh(c[j]);
  }
}

inline std::vector<double> affine(const std::vector<double>& x, const Tensor& w, const Tensor& b) {
  std::vector<double> y(w.cols());
  for (std::size_t k = 0; k < y.size(); ++k) {
    double s = b(0, k);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w(i, k);
    y[k] = s;
  }
  return y;
}

inline void split_head(const std::vector<double>& out, std::size_t d, std::vector<double>& m, std::vector<double>& lv) {
  m.assign(out.begin(), out.begin() + d);
  lv.assign(out.begin() + d, out.end());
  for (double& v : lv) v = std::clamp(v, model::kLogVarMin, model::kLogVarMax);
}

}  // namespace detail

// Decoder frame means (S×D) for latent (z1, z2).
inline std::vector<std::vector<double>> oracle_decode(const model::FhvaeModel& m, const std::vector<double>& z1,
                                                      const std::vector<double>& z2) {
  const auto& p = m.params;
  const std::size_t H = m.config.hidden;
  std::vector<double> z(z1);
  z.insert(z.end(), z2.begin(), z2.end());
  auto init = detail::affine(z, p.at("dec.init.w"), p.at("dec.init.b"));
  std::vector<double> h(H), c(H);
  for (std::size_t j = 0; j < H; ++j) {
    h[j] = std::tanh(init[j]);
    c[j] = init[H + j];
  }
  std::vector<std::vector<double>> means;
  for (std::size_t t = 0; t < m.config.segment_frames; ++t) {
    detail::lstm_step(z, h, c, p.at("dec.lstm.wx"), p.at("dec.lstm.wh"), p.at("dec.lstm.b"));
    means.push_back(detail::affine(h, p.at("dec.head.w"), p.at("dec.head.b")));
  }
  return means;
}

inline void oracle_encode_z2(const model::FhvaeModel& m, const Tensor& x, std::vector<double>& mean,
                             std::vector<double>& lv) {
  const auto& p = m.params;
  const std::size_t H = m.config.hidden;
  std::vector<double> h(H), c(H);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto r = x.row_span(t);
    detail::lstm_step(std::vector<double>(r.begin(), r.end()), h, c, p.at("z2enc.lstm.wx"), p.at("z2enc.lstm.wh"),
                      p.at("z2enc.lstm.b"));
  }
  detail::split_head(detail::affine(h, p.at("z2enc.head.w"), p.at("z2enc.head.b")), m.config.z2_dim, mean, lv);
}

inline void oracle_encode_z1(const model::FhvaeModel& m, const Tensor& x, const std::vector<double>& z2,
                             std::vector<double>& mean, std::vector<double>& lv) {
  const auto& p = m.params;
  const std::size_t H = m.config.hidden;
  std::vector<double> h(H), c(H);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto r = x.row_span(t);
    std::vector<double> in(r.begin(), r.end());
    in.insert(in.end(), z2.begin(), z2.end());
    detail::lstm_step(in, h, c, p.at("z1enc.lstm.wx"), p.at("z1enc.lstm.wh"), p.at("z1enc.lstm.b"));
  }
  detail::split_head(detail::affine(h, p.at("z1enc.head.w"), p.at("z1enc.head.b")), m.config.z1_dim, mean, lv);
}

inline double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
}

// Closed-form KL of N(m, e^lv) from N(pm, pv), one dimension.
inline double kl_1d(double m, double lv, double pm, double pv) {
  const double v = std::exp(lv);
  return 0.5 * (std::log(pv) - lv + (v + (m - pm) * (m - pm)) / pv - 1.0);
}

inline OracleBreakdown oracle_elbo(const model::FhvaeModel& m, const Tensor& x, const std::vector<double>& mu,
                                   double num_segments, const std::vector<double>& eps_z2,
                                   const std::vector<double>& eps_z1) {
  const auto& cfg = m.config;
  OracleBreakdown out;
  std::vector<double> m2, lv2, m1, lv1;
  oracle_encode_z2(m, x, m2, lv2);
  std::vector<double> z2(cfg.z2_dim);
  for (std::size_t k = 0; k < z2.size(); ++k) z2[k] = m2[k] + std::exp(0.5 * lv2[k]) * eps_z2[k];
  oracle_encode_z1(m, x, z2, m1, lv1);
  std::vector<double> z1(cfg.z1_dim);
  for (std::size_t k = 0; k < z1.size(); ++k) z1[k] = m1[k] + std::exp(0.5 * lv1[k]) * eps_z1[k];
  const auto means = oracle_decode(m, z1, z2);
  const Tensor& olv = m.params.at("dec.out_logvar");
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t j = 0; j < x.cols(); ++j) out.recon += log_normal(x(t, j), means[t][j], std::exp(olv(0, j)));
  }
  for (std::size_t k = 0; k < z1.size(); ++k) out.kl_z1 += kl_1d(m1[k], lv1[k], 0.0, cfg.var_z1);
  for (std::size_t k = 0; k < z2.size(); ++k) out.kl_z2 += kl_1d(m2[k], lv2[k], mu[k], cfg.var_z2);
  for (double v : mu) out.mu_prior += log_normal(v, 0.0, cfg.var_mu) / num_segments;
  out.total = out.recon - out.kl_z1 - out.kl_z2 + out.mu_prior;
  return out;
}

// Probabilists' Gauss–Hermite rule: Σ w_i f(x_i) ≈ E[f(ε)], ε ~ N(0, 1).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Quadrature gauss_hermite(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Quadrature q;
  for (int i = 0; i < n; ++i) {
    q.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    q.weights.push_back(v * v);
  }
  return q;
}

inline double logsumexp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

struct ToyBound {
  double expected_elbo = 0.0;
  double log_evidence = 0.0;
};

// One-frame, one-dimensional model for sequence row 0: the expected segment
// bound by Gauss-Hermite quadrature over both noises, and log p(x) plus the
// per-segment share of the mu prior by a dense grid over (z1, z2).
inline ToyBound toy_bound(const model::FhvaeModel& m, const Tensor& x, int nodes = 24, int grid = 241) {
  const auto& cfg = m.config;
  const auto gh = gauss_hermite(nodes);
  const double mu = m.mu_table()(0, 0);
  ToyBound out;
  for (std::size_t a = 0; a < gh.nodes.size(); ++a) {
    for (std::size_t b = 0; b < gh.nodes.size(); ++b) {
      model::SegmentNoise noise{Tensor::row(std::vector<double>{gh.nodes[a]}),
                                Tensor::row(std::vector<double>{gh.nodes[b]})};
      out.expected_elbo += gh.weights[a] * gh.weights[b] * model::segment_elbo(x, 0, m, noise).total;
    }
  }
  const double s1 = std::sqrt(cfg.var_z1), s2 = std::sqrt(cfg.var_z2);
  const double h1 = 20.0 * s1 / (grid - 1), h2 = 20.0 * s2 / (grid - 1);
  const double ov = std::exp(m.params.at("dec.out_logvar")(0, 0));
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i) {
    const double z1 = -10.0 * s1 + i * h1;
    for (int j = 0; j < grid; ++j) {
      const double z2 = mu - 10.0 * s2 + j * h2;
      const double mean = oracle_decode(m, {z1}, {z2})[0][0];
      terms.push_back(log_normal(x(0, 0), mean, ov) + log_normal(z1, 0.0, cfg.var_z1) + log_normal(z2, mu, cfg.var_z2));
    }
  }
  out.log_evidence = logsumexp(terms) + std::log(h1 * h2) +
                     log_normal(mu, 0.0, cfg.var_mu) / static_cast<double>(m.train_segments[0]);
  return out;
}

}  // namespace fhvc::testing

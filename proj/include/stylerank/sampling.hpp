// stylerank/sampling.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Speaker-condition balancing: project speaker embeddings to 2-D with exact
// t-SNE, cluster the projection with DBSCAN, then cap each cluster so that no
// dense speaker region dominates the pool.

#ifndef STYLERANK_SAMPLING_HPP_
#define STYLERANK_SAMPLING_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "stylerank/corpus.hpp"
#include "stylerank/embedding.hpp"
#include "stylerank/error.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

struct Projection2D {
  std::vector<std::array<double, 2>> points;
  double final_kl = 0.0;
  /// KL divergence after the first gradient step.
  double first_kl = 0.0;
};

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
};

namespace detail {

inline std::vector<double> squared_distances(const EmbeddingMatrix &x) {
  const std::size_t n = x.rows(), d = x.dims();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double *xi = x.values().data() + i * d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double *xj = x.values().data() + j * d;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = xi[k] - xj[k];
        s += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = s;
    }
  }
  return dist;
}

// Row-conditional affinities p(j|i) matching the target perplexity, found by
// bisection on the Gaussian precision. Exponents are shifted by the row's
// nearest distance so that large precisions cannot underflow the row sum.
inline std::vector<double> conditional_affinities(const std::vector<double> &dist,
                                                  std::size_t n,
                                                  double perplexity) {
  std::vector<double> p(n * n, 0.0);
  const double target = std::log(perplexity);
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, dist[i * n + j]);
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double *row = p.data() + i * n;
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double shifted = dist[i * n + j] - dmin;
        row[j] = std::exp(-beta * shifted);
        sum += row[j];
        weighted += shifted * row[j];
      }
      // Entropy of the normalized row, in nats.
      const double entropy = beta * weighted / sum + std::log(sum);
      for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
      const double gap = entropy - target;
      if (std::abs(gap) < 1e-5) break;
      if (gap > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
  }
  return p;
}

inline double kl_divergence(const std::vector<double> &p,
                            const std::vector<std::array<double, 2>> &y) {
  const std::size_t n = y.size();
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
      z += 1.0 / (1.0 + dx * dx + dy * dy);
    }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p[i * n + j];
      const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
      const double q = std::max(1.0 / (1.0 + dx * dx + dy * dy) / z, 1e-300);
      kl += pij * std::log(pij / q);
    }
  return std::max(kl, 0.0);
}

}  // namespace detail

/// Exact O(N^2) t-SNE into two dimensions. Deterministic for a fixed seed.
inline Projection2D tsne_project(const EmbeddingMatrix &emb,
                                 const TsneOptions &opt) {
  const std::size_t n = emb.rows();
  if (!emb.all_finite())
    throw ValidationError("tsne: embedding contains non-finite values");
  if (!(opt.perplexity > 0.0) || !(3.0 * opt.perplexity < static_cast<double>(n)))
    throw ConfigError("tsne: perplexity " + std::to_string(opt.perplexity) +
                      " too large for " + std::to_string(n) +
                      " rows (need 3*perplexity < rows)");
  if (opt.iterations < 250)
    throw ConfigError("tsne: iterations must be >= 250");

  const auto dist = detail::squared_distances(emb);
  const auto cond = detail::conditional_affinities(dist, n, opt.perplexity);
  std::vector<double> p(n * n);
  double psum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      p[i * n + j] = cond[i * n + j] + cond[j * n + i];
      psum += p[i * n + j];
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p[i * n + j] = i == j ? 0.0 : std::max(p[i * n + j] / psum, 1e-12);

  Rng rng(opt.seed);
  std::vector<std::array<double, 2>> y(n), update(n, {0.0, 0.0}),
      gains(n, {1.0, 1.0}), grad(n);
  for (auto &pt : y) pt = {rng.normal(0.0, 1e-4), rng.normal(0.0, 1e-4)};

  std::vector<double> num(n * n);
  Projection2D result;
  for (int iter = 0; iter < opt.iterations; ++iter) {
    const bool early = iter < opt.exaggeration_iterations;
    const double exag = early ? opt.exaggeration : 1.0;
    const double momentum = early ? opt.initial_momentum : opt.final_momentum;

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num[i * n + i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = v;
        z += 2.0 * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double v = num[i * n + j];
        const double m = (exag * p[i * n + j] - v / z) * v;
        gx += m * (y[i][0] - y[j][0]);
        gy += m * (y[i][1] - y[j][1]);
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
    }
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) {
        double &g = gains[i][k];
        g = (std::signbit(grad[i][k]) != std::signbit(update[i][k])) ? g + 0.2
                                                                      : g * 0.8;
        g = std::max(g, 0.01);
        update[i][k] = momentum * update[i][k] - opt.learning_rate * g * grad[i][k];
        y[i][k] += update[i][k];
      }
    std::array<double, 2> mean{0.0, 0.0};
    for (const auto &pt : y) {
      mean[0] += pt[0];
      mean[1] += pt[1];
    }
    for (auto &pt : y) {
      pt[0] -= mean[0] / static_cast<double>(n);
      pt[1] -= mean[1] / static_cast<double>(n);
    }
    if (iter == 0) result.first_kl = detail::kl_divergence(p, y);
  }
  result.final_kl = detail::kl_divergence(p, y);
  result.points = std::move(y);
  for (const auto &pt : result.points)
    if (!std::isfinite(pt[0]) || !std::isfinite(pt[1]))
      throw DomainError("tsne: optimization diverged");
  return result;
}

inline Projection2D tsne_project(const EmbeddingMatrix &emb, double perplexity,
                                 int iterations, std::uint64_t seed) {
  TsneOptions opt;
  opt.perplexity = perplexity;
  opt.iterations = iterations;
  opt.seed = seed;
  return tsne_project(emb, opt);
}

inline constexpr int kNoise = -1;

/// DBSCAN. A point's eps-neighbourhood (distance <= eps) includes the point
/// itself; core points have at least min_pts neighbours. Cluster ids are
/// dense and numbered in order of each cluster's lowest-index core point.
inline std::vector<int> cluster_points(const Projection2D &proj, double eps,
                                       std::size_t min_pts) {
  if (!(eps > 0.0)) throw ConfigError("dbscan: eps must be > 0");
  if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
  const auto &pts = proj.points;
  const std::size_t n = pts.size();
  const double eps2 = eps * eps;
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1];
      if (dx * dx + dy * dy <= eps2) out.push_back(j);
    }
    return out;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);
  int next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    auto seeds = neighbours(i);
    if (seeds.size() < min_pts) {
      labels[i] = kNoise;  // may be claimed later as a border point
      continue;
    }
    const int id = next_id++;
    labels[i] = id;
    std::deque<std::size_t> frontier(seeds.begin(), seeds.end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (labels[j] == kNoise) labels[j] = id;
      if (labels[j] != kUnvisited) continue;
      labels[j] = id;
      auto nb = neighbours(j);
      if (nb.size() >= min_pts)
        frontier.insert(frontier.end(), nb.begin(), nb.end());
    }
  }
  return labels;
}

/// Keeps at most `max_per_cluster` records from each cluster (seeded uniform
/// sampling without replacement); noise records are always kept. Output
/// preserves input order.
inline std::vector<UtteranceRecord> cap_clusters(
    const std::vector<UtteranceRecord> &records, const std::vector<int> &labels,
    std::size_t max_per_cluster, std::uint64_t seed) {
  if (records.size() != labels.size())
    throw ValidationError("cap_clusters: " + std::to_string(records.size()) +
                          " records but " + std::to_string(labels.size()) +
                          " labels");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) members[labels[i]].push_back(i);

  std::vector<char> keep(records.size(), 1);
  Rng rng(seed);
  for (auto &[id, idx] : members) {
    if (idx.size() <= max_per_cluster) continue;
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = max_per_cluster; k < idx.size(); ++k) keep[idx[k]] = 0;
  }
  std::vector<UtteranceRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep[i]) out.push_back(records[i]);
  return out;
}

}  // namespace stylerank

#endif  // STYLERANK_SAMPLING_HPP_

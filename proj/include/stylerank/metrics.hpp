// stylerank/metrics.hpp

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

// Pairwise evaluation statistics: ROC-AUC, accuracy, logistic NLL, percentile
// bootstrap intervals and the exact binomial test.

#ifndef STYLERANK_METRICS_HPP_
#define STYLERANK_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "stylerank/error.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

struct LabeledScorePair {
  double score_diff = 0.0;  // score(A) - score(B)
  bool label = false;       // true when A was preferred
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
};

/// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Mann-Whitney AUC of score_diff for positive vs negative labels, with tied
/// scores counted one half. Uses average ranks, O(n log n).
inline double roc_auc(std::span<const LabeledScorePair> items) {
  std::size_t n_pos = 0;
  for (const auto &it : items) {
    if (!std::isfinite(it.score_diff))
      throw DomainError("roc_auc: non-finite score_diff");
    n_pos += it.label;
  }
  const std::size_t n_neg = items.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DomainError("roc_auc: need both positive and negative labels");

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].score_diff < items[b].score_diff;
  });
  // Sum of (1-based, tie-averaged) ranks of the positives, doubled to stay
  // integral.
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() &&
           items[order[j]].score_diff == items[order[i]].score_diff)
      ++j;
    const std::uint64_t avg2 = (i + 1) + j;  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (items[order[k]].label) rank_sum2 += avg2;
    i = j;
  }
  const double u2 = static_cast<double>(rank_sum2 - n_pos * (n_pos + 1));
  return u2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Fraction of items where sign(score_diff) agrees with the label; a zero
/// difference counts one half.
inline double pairwise_accuracy(std::span<const LabeledScorePair> items) {
  if (items.empty()) throw DomainError("pairwise_accuracy: empty input");
  double hits = 0.0;
  for (const auto &it : items) {
    if (it.score_diff == 0.0)
      hits += 0.5;
    else if ((it.score_diff > 0.0) == it.label)
      hits += 1.0;
  }
  return hits / static_cast<double>(items.size());
}

/// Mean pairwise logistic loss -log sigma(+-score_diff).
inline double mean_nll(std::span<const LabeledScorePair> items) {
  if (items.empty()) throw DomainError("mean_nll: empty input");
  double total = 0.0;
  for (const auto &it : items)
    total -= log_sigmoid(it.label ? it.score_diff : -it.score_diff);
  return total / static_cast<double>(items.size());
}

/// Linear-interpolation quantile of sorted data (the "type 7" definition).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of empty set");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile bootstrap interval for the mean of a boolean sample. Replicate
/// r draws from Rng::derived(seed, r), so the result does not depend on the
/// order replicates are computed in.
inline ConfidenceInterval bootstrap_ci(const std::vector<bool> &samples,
                                       std::size_t b, double level,
                                       std::uint64_t seed) {
  if (samples.empty()) throw DomainError("bootstrap_ci: empty sample");
  if (b < 100) throw DomainError("bootstrap_ci: need at least 100 resamples");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("bootstrap_ci: level must lie in (0, 1)");
  const std::size_t n = samples.size();
  std::vector<double> means(b);
  for (std::size_t r = 0; r < b; ++r) {
    Rng rng = Rng::derived(seed, r);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += samples[rng.index(n)];
    means[r] = static_cast<double>(hits) / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  return {quantile_sorted(means, alpha / 2), quantile_sorted(means, 1.0 - alpha / 2),
          level};
}

/// 1-based ranks with ties given their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = 0.5 * static_cast<double>(i + 1 + j);
    i = j;
  }
  return ranks;
}

/// Spearman rank correlation (Pearson correlation of average ranks).
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DomainError("spearman: need two equal-length samples of size >= 2");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("spearman: constant sample");
  return sxy / std::sqrt(sxx * syy);
}

inline double log_binomial_pmf(std::size_t k, std::size_t n, double p) {
  const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0);
  const double lk = k == 0 ? 0.0 : k * std::log(p);
  const double lnk = n == k ? 0.0 : (n - k) * std::log1p(-p);
  return lc + lk + lnk;
}

/// Exact two-sided binomial test: total probability of outcomes no more likely
/// than the observed one under p0. A relative tolerance absorbs rounding when
/// comparing probabilities, as in R's binom.test.
inline double binomial_pvalue(std::size_t successes, std::size_t n, double p0) {
  if (n == 0) throw DomainError("binomial_pvalue: n must be at least 1");
  if (successes > n) throw DomainError("binomial_pvalue: successes exceed n");
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw DomainError("binomial_pvalue: p0 must lie in [0, 1]");
  if (p0 == 0.0) return successes == 0 ? 1.0 : 0.0;
  if (p0 == 1.0) return successes == n ? 1.0 : 0.0;
  const double observed = log_binomial_pmf(successes, n, p0);
  const double cutoff = observed + std::log1p(1e-7);
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double lp = log_binomial_pmf(i, n, p0);
    if (lp <= cutoff) total += std::exp(lp);
  }
  return std::min(1.0, total);
}

}  // namespace stylerank

#endif  // STYLERANK_METRICS_HPP_

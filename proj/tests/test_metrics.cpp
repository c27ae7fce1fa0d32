// tests/test_metrics.cpp

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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stylerank/metrics.hpp"

namespace stylerank {
namespace {

using testing::brute_force_auc;
using testing::pmf_pvalue;
using testing::random_items;

TEST(RocAuc, PerfectSeparation) {
  std::vector<LabeledScorePair> items{{2.0, true}, {1.0, true}, {-1.0, false}, {-3.0, false}};
  EXPECT_DOUBLE_EQ(roc_auc(items), 1.0);
}

TEST(RocAuc, AllTiesIsHalf) {
  std::vector<LabeledScorePair> items{{0.3, true}, {0.3, false}, {0.3, true}, {0.3, false}};
  EXPECT_DOUBLE_EQ(roc_auc(items), 0.5);
}

TEST(RocAuc, SingleClassIsDomainError) {
  std::vector<LabeledScorePair> items{{0.3, true}, {0.1, true}};
  EXPECT_THROW(roc_auc(items), DomainError);
}

TEST(RocAuc, MatchesBruteForce) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto items = random_items(rng, 200, rep % 2 == 0);
    EXPECT_NEAR(roc_auc(items), brute_force_auc(items), 1e-12);
  }
}

TEST(RocAuc, FlipSymmetryAndMonotoneInvariance) {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    auto items = random_items(rng, 80, true);
    const double base = roc_auc(items);
    auto flipped = items;
    for (auto &it : flipped) {
      it.score_diff = -it.score_diff;
      it.label = !it.label;
    }
    EXPECT_NEAR(roc_auc(flipped), base, 1e-12);
    auto warped = items;
    for (auto &it : warped) it.score_diff = std::exp(3 * it.score_diff) + 5;
    EXPECT_NEAR(roc_auc(warped), base, 1e-12);
  }
}

TEST(PairwiseAccuracy, Arithmetic) {
  std::vector<LabeledScorePair> all{{1, true}, {-2, false}};
  EXPECT_DOUBLE_EQ(pairwise_accuracy(all), 1.0);
  std::vector<LabeledScorePair> tie{{0, true}, {1, true}};
  EXPECT_DOUBLE_EQ(pairwise_accuracy(tie), 0.75);
}

TEST(PairwiseAccuracy, MatchesRecount) {
  Rng rng(3);
  const auto items = random_items(rng, 300, true);
  double hits = 0;
  for (const auto &it : items)
    hits += it.score_diff == 0 ? 0.5 : ((it.score_diff > 0) == it.label ? 1 : 0);
  EXPECT_DOUBLE_EQ(pairwise_accuracy(items), hits / items.size());
}

TEST(MeanNll, ZeroDiffsIsLn2) {
  std::vector<LabeledScorePair> items{{0, true}, {0, false}, {0, true}};
  EXPECT_NEAR(mean_nll(items), std::numbers::ln2, 1e-15);
}

TEST(MeanNll, SaturatesWithoutOverflow) {
  std::vector<LabeledScorePair> good{{1000, true}};
  EXPECT_GE(mean_nll(good), 0.0);
  EXPECT_LT(mean_nll(good), 1e-300);
  std::vector<LabeledScorePair> bad{{1000, false}};
  EXPECT_DOUBLE_EQ(mean_nll(bad), 1000.0);
}

TEST(MeanNll, MatchesExtendedPrecision) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  Rng rng(4);
  std::vector<LabeledScorePair> items;
  for (int i = 0; i < 200; ++i) items.push_back({rng.normal(0, 20), rng.bernoulli(0.5)});
  Big total = 0;
  for (const auto &it : items) {
    const Big d = it.label ? it.score_diff : -it.score_diff;
    total += log1p(exp(-d));
  }
  const double ref = static_cast<double>(total / items.size());
  EXPECT_NEAR(mean_nll(items), ref, 1e-12 * ref);
}

TEST(BootstrapCi, DegenerateSample) {
  std::vector<bool> all(50, true);
  const auto ci = bootstrap_ci(all, 1000, 0.95, 1);
  EXPECT_EQ(ci.lower, 1.0);
  EXPECT_EQ(ci.upper, 1.0);
}

TEST(BootstrapCi, DeterministicAndBounded) {
  Rng rng(5);
  std::vector<bool> s(200);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = rng.bernoulli(0.6);
  const auto a = bootstrap_ci(s, 1000, 0.95, 9), b = bootstrap_ci(s, 1000, 0.95, 9);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_LE(0.0, a.lower);
  EXPECT_LE(a.lower, a.upper);
  EXPECT_LE(a.upper, 1.0);
}

TEST(BootstrapCi, RejectsFewResamples) {
  std::vector<bool> s{true, false};
  EXPECT_THROW(bootstrap_ci(s, 99, 0.95, 0), DomainError);
}

TEST(BinomialPvalue, ExactHalfIsOne) {
  EXPECT_DOUBLE_EQ(binomial_pvalue(50, 100, 0.5), 1.0);
}

TEST(BinomialPvalue, AllSuccessesClosedForm) {
  EXPECT_NEAR(binomial_pvalue(20, 20, 0.5), 2.0 * std::pow(2.0, -20), 1e-18);
}

TEST(BinomialPvalue, MatchesPmfSummation) {
  EXPECT_NEAR(binomial_pvalue(60, 100, 0.5), pmf_pvalue(60, 100, 0.5), 1e-10);
  for (int n : {1, 7, 33, 120}) {
    for (int k = 0; k <= n; ++k) {
      for (double p0 : {0.5, 0.3, 0.82}) {
        EXPECT_NEAR(binomial_pvalue(k, n, p0), pmf_pvalue(k, n, p0), 1e-10)
            << k << "/" << n << " p0=" << p0;
      }
    }
  }
}

TEST(Spearman, MonotoneIsOne) {
  std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 8, 16, 32};
  EXPECT_NEAR(spearman(x, y), 1.0, 1e-15);
  std::vector<double> z{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(x, z), -1.0, 1e-15);
}

}  // namespace
}  // namespace stylerank

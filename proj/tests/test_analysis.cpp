// tests/test_analysis.cpp

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

#include <cmath>

#include "stylerank/analysis.hpp"

namespace stylerank {
namespace {

ComparisonPair make_pair(const std::string &id, const std::string &a, const std::string &b) {
  ComparisonPair p;
  p.pair_id = id;
  p.utt_a = a;
  p.utt_b = b;
  return p;
}

JudgmentRecord judge(const std::string &pair_id, Slot choice) {
  JudgmentRecord j;
  j.pair_id = pair_id;
  j.rater_id = "r";
  j.session_id = "s";
  j.choice = choice;
  j.timestamp = "t";
  return j;
}

ProxyVector with(Proxy p, double v) {
  ProxyVector out;
  out.set(p, v);
  return out;
}

ProxyVector full(double base) {
  ProxyVector v;
  for (std::size_t k = 0; k < kNumProxies; ++k) v.values[k] = base + k;
  return v;
}

TEST(WinRate, CountsWinsAndAppearances) {
  std::vector<ComparisonPair> pairs{make_pair("p1", "u", "v"), make_pair("p2", "u", "w")};
  std::vector<JudgmentRecord> js{judge("p1", Slot::kA), judge("p1", Slot::kA),
                                 judge("p2", Slot::kA), judge("p2", Slot::kB)};
  const auto w = empirical_win_rate(js, pairs);
  EXPECT_EQ(w.at("u").wins, 3u);
  EXPECT_EQ(w.at("u").appearances, 4u);
  EXPECT_DOUBLE_EQ(w.at("u").rate(), 0.75);
  EXPECT_EQ(w.at("v").wins, 0u);
  EXPECT_EQ(w.at("w").wins, 1u);
  EXPECT_EQ(w.count("x"), 0u);
}

TEST(WinRate, DanglingPairIsValidationError) {
  std::vector<ComparisonPair> pairs{make_pair("p1", "u", "v")};
  std::vector<JudgmentRecord> js{judge("nope", Slot::kA)};
  EXPECT_THROW(empirical_win_rate(js, pairs), ValidationError);
}

TEST(WinMatrix, HandBuiltLog) {
  std::vector<UtteranceRecord> recs(4);
  recs[0].id = "a1"; recs[0].source = "anime";
  recs[1].id = "a2"; recs[1].source = "anime";
  recs[2].id = "r1"; recs[2].source = "read";
  recs[3].id = "c1"; recs[3].source = "chat";
  std::vector<ComparisonPair> pairs{make_pair("p1", "a1", "r1"), make_pair("p2", "r1", "a2"),
                                    make_pair("p3", "a1", "a2"), make_pair("p4", "c1", "a1")};
  std::vector<JudgmentRecord> js{judge("p1", Slot::kA), judge("p1", Slot::kB),
                                 judge("p2", Slot::kB), judge("p3", Slot::kA),
                                 judge("p4", Slot::kB), judge("p4", Slot::kB)};
  const auto m = corpus_win_matrix(js, pairs, recs);
  // anime vs read: anime won p1/A, p2/B; read won p1/B.
  EXPECT_EQ(m.at({"anime", "read"}).wins, 2u);
  EXPECT_EQ(m.at({"anime", "read"}).appearances, 3u);
  EXPECT_DOUBLE_EQ(m.at({"anime", "read"}).rate() + m.at({"read", "anime"}).rate(), 1.0);
  EXPECT_DOUBLE_EQ(m.at({"anime", "chat"}).rate(), 1.0);
  EXPECT_EQ(m.count({"anime", "anime"}), 0u);
  EXPECT_EQ(m.count({"read", "chat"}), 0u);
  EXPECT_NE(format_win_matrix(m).find("66.7%"), std::string::npos);
}

// Ten judgments with hand-set pause ratios; expected counts worked out by hand.
TEST(ComputePcr, HandBuiltCounts) {
  ProxyTable t;
  t["u1"] = with(Proxy::kPauseRatio, 0.10);
  t["u2"] = with(Proxy::kPauseRatio, 0.30);
  t["u3"] = with(Proxy::kPauseRatio, 0.20);
  t["u4"] = with(Proxy::kPauseRatio, 0.20);
  t["u5"] = ProxyVector{};  // absent
  std::vector<ComparisonPair> pairs{make_pair("p12", "u1", "u2"), make_pair("p13", "u1", "u3"),
                                    make_pair("p34", "u3", "u4"), make_pair("p15", "u1", "u5"),
                                    make_pair("p23", "u2", "u3")};
  std::vector<JudgmentRecord> js{
      judge("p12", Slot::kA),  // winner u1 lower: discordant
      judge("p12", Slot::kA),  // discordant
      judge("p12", Slot::kB),  // winner u2 higher: concordant
      judge("p13", Slot::kA),  // discordant
      judge("p13", Slot::kA),  // discordant
      judge("p34", Slot::kA),  // tie: excluded
      judge("p15", Slot::kA),  // absent: excluded
      judge("p23", Slot::kB),  // winner u3 lower: discordant
      judge("p23", Slot::kB),  // discordant
      judge("p23", Slot::kA),  // concordant
  };
  const auto r = compute_pcr("pause_ratio", t, js, pairs, 200, 1);
  EXPECT_EQ(r.n_used, 8u);
  EXPECT_EQ(r.direction, Direction::kLower);
  EXPECT_DOUBLE_EQ(r.pcr, 6.0 / 8.0);
  EXPECT_NEAR(r.p_value, binomial_pvalue(6, 8, 0.5), 0);
  EXPECT_LE(r.ci.lower, r.pcr);
  EXPECT_GE(r.ci.upper, r.pcr);
}

TEST(ComputePcr, AllTiesIsDomainError) {
  ProxyTable t;
  t["a"] = with(Proxy::kMeanF0, 200);
  t["b"] = with(Proxy::kMeanF0, 200);
  std::vector<ComparisonPair> pairs{make_pair("p", "a", "b")};
  std::vector<JudgmentRecord> js{judge("p", Slot::kA)};
  EXPECT_THROW(compute_pcr("mean_f0_hz", t, js, pairs), DomainError);
}

TEST(ComputePcr, UnknownProxyIsLookupError) {
  EXPECT_THROW(compute_pcr("loudness", {}, {}, {}), LookupError);
}

TEST(ComputePcr, NegationFlipsDirectionKeepsPcr) {
  Rng rng(3);
  ProxyTable t, neg;
  std::vector<ComparisonPair> pairs;
  std::vector<JudgmentRecord> js;
  for (int i = 0; i < 30; ++i) {
    const double v = rng.normal();
    t["u" + std::to_string(i)] = full(v);
    ProxyVector n;
    for (std::size_t k = 0; k < kNumProxies; ++k) n.values[k] = -(v + k);
    neg["u" + std::to_string(i)] = n;
  }
  for (int k = 0; k < 101; ++k) {
    const auto a = rng.index(30), b = (a + 1 + rng.index(29)) % 30;
    pairs.push_back(make_pair("p" + std::to_string(k), "u" + std::to_string(a),
                              "u" + std::to_string(b)));
    js.push_back(judge("p" + std::to_string(k), rng.bernoulli(0.7) ? Slot::kA : Slot::kB));
  }
  for (const auto &info : kProxyInfo) {
    const auto r = compute_pcr(info.key, t, js, pairs, 200, 0);
    const auto s = compute_pcr(info.key, neg, js, pairs, 200, 0);
    EXPECT_EQ(r.pcr, s.pcr);
    EXPECT_NE(r.direction, s.direction);
    EXPECT_GE(r.pcr, 0.5);
  }
  EXPECT_EQ(compute_all_pcr(t, js, pairs, 200, 0).size(), 11u);
}

TEST(DiffDataset, AugmentationAndDrops) {
  ProxyTable t;
  t["a"] = full(1.0);
  t["b"] = full(3.0);
  t["c"] = full(0.0);
  t["c"].set(Proxy::kF1Median, std::nullopt);
  std::vector<ComparisonPair> pairs{make_pair("ab", "a", "b"), make_pair("ac", "a", "c")};
  std::vector<JudgmentRecord> js{judge("ab", Slot::kA), judge("ac", Slot::kB),
                                 judge("ab", Slot::kB)};
  const auto d = build_diff_dataset(pairs, t, js);
  EXPECT_EQ(d.rows(), 4u);
  EXPECT_EQ(d.dropped, 1u);
  EXPECT_EQ(d.y[0], 1);
  EXPECT_EQ(d.y[1], 0);
  EXPECT_DOUBLE_EQ(d.x(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(d.x(1, 0), 2.0);
  EXPECT_EQ(d.group[0], d.group[1]);
  EXPECT_NE(d.group[1], d.group[2]);
  EXPECT_EQ(d.y[2], 0);
}

DiffDataset synthetic(const Eigen::VectorXd &w_true, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const auto p = w_true.size();
  DiffDataset d;
  for (Eigen::Index k = 0; k < p; ++k) d.feature_names.push_back("f" + std::to_string(k));
  d.x.resize(static_cast<Eigen::Index>(2 * n), p);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x(p);
    for (Eigen::Index k = 0; k < p; ++k) x[k] = rng.normal(0, 1.0 + k);
    const int y = rng.bernoulli(sigmoid(x.dot(w_true)));
    d.x.row(2 * i) = x.transpose();
    d.x.row(2 * i + 1) = -x.transpose();
    d.y.push_back(y);
    d.y.push_back(1 - y);
    d.group.push_back(i);
    d.group.push_back(i);
  }
  return d;
}

TEST(FitLogistic, RecoversKnownWeights) {
  Eigen::VectorXd w(4);
  w << 1.0, -0.5, 0.25, 0.0;
  const auto d = synthetic(w, 10000, 11);
  const auto m = fit_logistic(d, 1e-4);
  // Map back to raw-feature weights before comparing directions.
  const Eigen::VectorXd raw = m.weights.array() / m.feature_stds.array();
  EXPECT_GE(raw.dot(w) / (raw.norm() * w.norm()), 0.99);
}

TEST(FitLogistic, Antisymmetric) {
  Eigen::VectorXd w(3);
  w << 0.3, 1.0, -2.0;
  const auto d = synthetic(w, 500, 12);
  const auto m = fit_logistic(d, 1e-3);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Eigen::RowVectorXd x(3);
    x << rng.normal(), rng.normal(0, 5), rng.normal(0, 0.1);
    EXPECT_NEAR(m.probability(x) + m.probability(-x), 1.0, 1e-10);
  }
}

TEST(FitLogistic, SeparableStaysFinite) {
  DiffDataset d;
  d.feature_names = {"x"};
  d.x.resize(20, 1);
  for (int i = 0; i < 10; ++i) {
    d.x(2 * i, 0) = i + 1.0;
    d.x(2 * i + 1, 0) = -(i + 1.0);
    d.y.push_back(1);
    d.y.push_back(0);
    d.group.push_back(i);
    d.group.push_back(i);
  }
  const auto m = fit_logistic(d, 1e-2);
  EXPECT_TRUE(std::isfinite(m.weights[0]));
  EXPECT_GT(m.weights[0], 0.0);
}

// With tol = 0 the gradient test never fires; the fit must end at the point
// where the line search can no longer lower the objective, not throw.
TEST(FitLogistic, StallAtRoundingFloorIsConvergence) {
  Eigen::VectorXd w(2);
  w << 0.8, -0.4;
  auto d = synthetic(w, 3000, 13);
  // Append a collinear copy of the first column.
  d.x.conservativeResize(Eigen::NoChange, 3);
  d.x.col(2) = 2.0 * d.x.col(0);
  d.feature_names.push_back("f0x2");
  const auto loose = fit_logistic(d, 1e-4);
  const auto tight = fit_logistic(d, 1e-4, 100, 0.0);
  EXPECT_LE((loose.weights - tight.weights).norm(), 1e-6);
  EXPECT_NEAR(tight.weights[0], tight.weights[2], 1e-6);
}

TEST(FitLogistic, SingleClassIsDomainError) {
  DiffDataset d;
  d.feature_names = {"x"};
  d.x = Eigen::MatrixXd::Ones(3, 1);
  d.y = {1, 1, 1};
  d.group = {0, 1, 2};
  EXPECT_THROW(fit_logistic(d), DomainError);
}

TEST(CrossValidate, MeansMatchFoldsAndMatesShareFolds) {
  Eigen::VectorXd w(11);
  w << 1, 0, 0, 0, 0.5, 0, 0, -0.7, 0, 0.3, 0;
  auto d = synthetic(w, 1000, 21);
  d.feature_names.clear();
  for (const auto &info : kProxyInfo) d.feature_names.emplace_back(info.key);
  const auto folds = stratified_folds(d, 5, 3);
  for (std::size_t i = 0; i + 1 < d.rows(); i += 2) EXPECT_EQ(folds[i], folds[i + 1]);
  const auto r = cross_validate(d, 5, {}, 3);
  ASSERT_EQ(r.folds.size(), 5u);
  double acc = 0, auc = 0;
  for (const auto &f : r.folds) {
    acc += f.accuracy;
    auc += f.auc;
  }
  EXPECT_NEAR(r.mean_acc, acc / 5, 1e-12);
  EXPECT_NEAR(r.mean_auc, auc / 5, 1e-12);
  EXPECT_EQ(r.coefficients.size(), 11u);
  const auto timbre = cross_validate(d, 5, dimension_features("Timbre Difference"), 3);
  EXPECT_EQ(timbre.coefficients.size(), 3u);
  EXPECT_GE(r.mean_auc, timbre.mean_auc - 0.01);
}

TEST(CrossValidate, FoldsAreBalanced) {
  Eigen::VectorXd w(2);
  w << 1, -1;
  const auto d = synthetic(w, 503, 5);
  const auto folds = stratified_folds(d, 5, 1);
  std::vector<int> count(5, 0);
  for (auto f : folds) ++count[f];
  for (int c : count) EXPECT_NEAR(c, 2 * 503 / 5.0, 2.0);
}

TEST(Reports, PcrTableHasElevenRows) {
  std::vector<PCRResult> rows;
  for (const auto &info : kProxyInfo) {
    PCRResult r;
    r.proxy_name = info.key;
    r.pcr = 0.6;
    rows.push_back(r);
  }
  const auto table = format_pcr_table(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 12);
  EXPECT_NE(table.find("F2 median (Hz)"), std::string::npos);
}

}  // namespace
}  // namespace stylerank

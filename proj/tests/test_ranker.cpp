// tests/test_ranker.cpp

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
#include <filesystem>
#include <numbers>

#include "stylerank/ranker.hpp"

namespace stylerank {
namespace {

FeatureSequence random_sequence(Rng &rng, Eigen::Index frames, Eigen::Index dims) {
  FeatureSequence x(frames, dims);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

ScoreModel small_model(Aggregator agg, std::uint64_t seed) {
  ModelConfig c;
  c.aggregator = agg;
  c.input_dim = 4;
  c.hidden_dim = 3;
  c.mlp_dims = {8, 1};
  ScoreModel m(c);
  m.initialize(seed);
  return m;
}

TEST(ScoreModel, ZeroParametersScoreZero) {
  Rng rng(1);
  for (auto agg : {Aggregator::kMeanPool, Aggregator::kRecurrent}) {
    ModelConfig c;
    c.aggregator = agg;
    c.input_dim = 5;
    c.hidden_dim = 4;
    ScoreModel m(c);
    EXPECT_EQ(m.score(random_sequence(rng, 7, 5)), 0.0);
  }
}

TEST(ScoreModel, SingleFrameMeanPoolIsMlpOfFrame) {
  Rng rng(2);
  const auto m = small_model(Aggregator::kMeanPool, 3);
  const auto x = random_sequence(rng, 1, 4);
  EXPECT_EQ(m.score(x), m.score_representation(x.row(0).transpose()));
}

TEST(ScoreModel, MeanPoolIsPermutationInvariant) {
  Rng rng(3);
  const auto m = small_model(Aggregator::kMeanPool, 4);
  auto x = random_sequence(rng, 9, 4);
  const double s = m.score(x);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(9);
  perm.setIdentity();
  std::vector<int> idx(perm.indices().data(), perm.indices().data() + 9);
  rng.shuffle(std::span<int>(idx));
  for (int i = 0; i < 9; ++i) perm.indices()[i] = idx[i];
  EXPECT_NEAR(m.score(perm * x), s, 1e-12);
}

TEST(ScoreModel, DimMismatchIsShapeError) {
  Rng rng(4);
  const auto m = small_model(Aggregator::kMeanPool, 1);
  EXPECT_THROW(m.score(random_sequence(rng, 3, 5)), ShapeError);
}

TEST(PairProbability, IdenticalInputsAndComplement) {
  Rng rng(5);
  for (auto agg : {Aggregator::kMeanPool, Aggregator::kRecurrent}) {
    const auto m = small_model(agg, 6);
    const auto a = random_sequence(rng, 5, 4), b = random_sequence(rng, 3, 4);
    EXPECT_EQ(pair_probability(m, a, a), 0.5);
    EXPECT_NEAR(pair_probability(m, a, b) + pair_probability(m, b, a), 1.0, 1e-12);
  }
}

TEST(PairProbability, MatchesExtendedPrecisionSigmoid) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    auto m = small_model(Aggregator::kMeanPool, 100 + i);
    for (auto &p : m.params()) p *= 5;
    const auto a = random_sequence(rng, 4, 4), b = random_sequence(rng, 4, 4);
    const Big d = Big(m.score(a)) - Big(m.score(b));
    const double ref = static_cast<double>(1 / (1 + exp(-d)));
    EXPECT_NEAR(pair_probability(m, a, b), ref, 1e-15);
  }
}

TEST(GradientCheck, BothAggregatorsOverSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 1000);
    for (auto agg : {Aggregator::kMeanPool, Aggregator::kRecurrent}) {
      const auto m = small_model(agg, seed);
      const auto a = random_sequence(rng, 1 + rng.index(5), 4);
      const auto b = random_sequence(rng, 1 + rng.index(5), 4);
      EXPECT_LT(gradient_check(m, a, b, rng.bernoulli(0.5), 1e-5), 1e-4)
          << aggregator_name(agg) << " seed " << seed;
    }
  }
}

TEST(GradientCheck, ZeroModel) {
  Rng rng(8);
  ModelConfig c;
  c.input_dim = 4;
  c.mlp_dims = {8, 1};
  const ScoreModel m(c);
  EXPECT_LT(gradient_check(m, random_sequence(rng, 2, 4), random_sequence(rng, 2, 4), true),
            1e-4);
}

TEST(ModelFile, RoundTripIsExactAndCanonical) {
  Rng rng(9);
  for (auto agg : {Aggregator::kMeanPool, Aggregator::kRecurrent}) {
    const auto m = small_model(agg, 10);
    const auto bytes = encode_model(m);
    const auto back = decode_model(bytes);
    EXPECT_EQ(back.params(), m.params());
    EXPECT_EQ(encode_model(back), bytes);
    const auto x = random_sequence(rng, 3, 4);
    EXPECT_EQ(back.score(x), m.score(x));
  }
}

TEST(ModelFile, TruncatedOrWrongVersionFails) {
  const auto bytes = encode_model(small_model(Aggregator::kMeanPool, 1));
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() - 1})
    EXPECT_THROW(decode_model(std::span<const char>(bytes.data(), cut)), IoError);
  auto bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_model(bad), IoError);
}

// Utterance i has latent value theta_i; its frames are theta_i * u + noise.
struct ToyTask {
  FeatureStore store;
  std::vector<double> theta;
  std::vector<PairOutcome> train, test;
};

ToyTask toy_task(std::size_t n_utt, std::size_t n_pairs, double noise, bool deterministic,
                 std::uint64_t seed) {
  Rng rng(seed);
  ToyTask t;
  Eigen::VectorXd u(6);
  for (auto &v : u) v = rng.normal();
  u.normalize();
  for (std::size_t i = 0; i < n_utt; ++i) {
    t.theta.push_back(rng.normal(0, 1.5));
    FeatureSequence x(10, 6);
    for (Eigen::Index r = 0; r < 10; ++r)
      for (Eigen::Index c = 0; c < 6; ++c) x(r, c) = t.theta.back() * u[c] + noise * rng.normal();
    t.store.insert("u" + std::to_string(i), x);
  }
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const auto a = rng.index(n_utt), b = (a + 1 + rng.index(n_utt - 1)) % n_utt;
    const double d = t.theta[a] - t.theta[b];
    const bool a_wins = deterministic ? d > 0 : rng.bernoulli(sigmoid(d));
    (k % 5 == 0 ? t.test : t.train)
        .push_back({"u" + std::to_string(a), "u" + std::to_string(b), a_wins});
  }
  return t;
}

TEST(TrainRanker, FirstEpochNearLn2AndDeterministic) {
  auto t = toy_task(40, 300, 0.5, false, 1);
  ModelConfig mc;
  mc.mlp_dims = {16, 1};
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 3;
  const auto r1 = train_ranker(t.train, t.store, mc, tc);
  const auto r2 = train_ranker(t.train, t.store, mc, tc);
  // A single init can lean either way; over inits the start is uninformed.
  double start = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    tc.seed = s;
    tc.epochs = 1;
    start += train_ranker(t.train, t.store, mc, tc).log.front().train_nll / 20;
  }
  EXPECT_NEAR(start, std::numbers::ln2, 0.05);
  EXPECT_EQ(r1.model.params(), r2.model.params());
  EXPECT_EQ(training_log_csv(r1.log), training_log_csv(r2.log));
}

TEST(TrainRanker, SeparableTaskIsLearned) {
  auto t = toy_task(60, 800, 0.1, true, 2);
  ModelConfig mc;
  mc.mlp_dims = {16, 1};
  TrainConfig tc;
  tc.epochs = 60;
  const auto r = train_ranker(t.train, t.store, mc, tc);
  const auto e = evaluate_ranker(r.model, t.test, t.store);
  EXPECT_GE(e.accuracy, 0.99);
  EXPECT_GE(e.auc, 0.99);
}

TEST(TrainRanker, FullBatchLossNonIncreasing) {
  auto t = toy_task(20, 50, 0.5, false, 4);
  ModelConfig mc;
  mc.mlp_dims = {8, 1};
  TrainConfig tc;
  tc.batch_size = 1000;
  tc.learning_rate = 0.01;
  tc.momentum = 0.0;
  tc.l2 = 0.0;
  tc.valid_fraction = 0.0;
  tc.epochs = 40;
  const auto r = train_ranker(t.train, t.store, mc, tc);
  for (std::size_t i = 1; i < r.log.size(); ++i)
    EXPECT_LE(r.log[i].train_nll, r.log[i - 1].train_nll + 1e-12);
}

TEST(EvaluateRanker, ConstantModelIsChance) {
  auto t = toy_task(20, 100, 0.5, false, 5);
  ModelConfig mc;
  mc.input_dim = 6;
  const ScoreModel zero(mc);
  const auto e = evaluate_ranker(zero, t.test, t.store);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(e.auc, 0.5);
  EXPECT_NEAR(e.nll, std::numbers::ln2, 1e-12);
}

TEST(EvaluateRanker, ScoreShiftChangesNothing) {
  auto t = toy_task(30, 200, 0.5, false, 6);
  ModelConfig mc;
  mc.input_dim = 6;
  mc.mlp_dims = {8, 1};
  ScoreModel m(mc);
  m.initialize(1);
  const auto before = evaluate_ranker(m, t.test, t.store);
  m.params().back() += 3.25;  // output bias
  const auto after = evaluate_ranker(m, t.test, t.store);
  EXPECT_NEAR(before.nll, after.nll, 1e-12);
  EXPECT_EQ(before.accuracy, after.accuracy);
  EXPECT_EQ(before.auc, after.auc);
}

TEST(FeatureStore, ReadsFrameFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "stylerank_fse_test";
  std::filesystem::create_directories(dir);
  EmbeddingMatrix e(2, 3, {1, 2, 3, 4, 5, 6});
  save_embedding(dir / "utt.fse", e);
  auto store = FeatureStore::from_directory(dir);
  EXPECT_EQ(store.frames("utt")(1, 2), 6.0);
  EXPECT_EQ(store.pooled("utt")[0], 2.5);
  EXPECT_THROW(store.frames("missing"), LookupError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace stylerank

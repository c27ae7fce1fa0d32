// tests/test_sampling.cpp

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

#include <filesystem>
#include <map>
#include <set>

#include "oracles.hpp"
#include "stylerank/sampling.hpp"

namespace stylerank {
namespace {

EmbeddingMatrix gaussian_blobs(std::size_t per_blob, std::size_t blobs, std::size_t dims,
                               std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix m(per_blob * blobs, dims);
  for (std::size_t b = 0; b < blobs; ++b)
    for (std::size_t i = 0; i < per_blob; ++i)
      for (std::size_t d = 0; d < dims; ++d)
        m(b * per_blob + i, d) = (d == b ? 20.0 : 0.0) + rng.normal();
  return m;
}

TEST(Embedding, FileRoundTripAtFloatPrecision) {
  EmbeddingMatrix m(3, 2, {0.1, -2.5, 3.0, 1e-3, 7.25, 0.0});
  const auto p = std::filesystem::temp_directory_path() / "stylerank_emb.bin";
  save_embedding(p, m);
  EXPECT_EQ(std::filesystem::file_size(p), 16u + 4u * 6u);
  const auto back = load_embedding(p);
  ASSERT_EQ(back.rows(), 3u);
  ASSERT_EQ(back.dims(), 2u);
  for (std::size_t i = 0; i < 6; ++i)
    EXPECT_EQ(back.values()[i], static_cast<double>(static_cast<float>(m.values()[i])));
  std::filesystem::remove(p);
}

TEST(Embedding, HeaderErrors) {
  auto bytes = encode_embedding(EmbeddingMatrix(2, 2, {1, 2, 3, 4}));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_embedding(bad), IoError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_embedding(bad), IoError);
  bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(decode_embedding(bad), IoError);
  const float nan = std::nanf("");
  std::memcpy(bytes.data() + 16, &nan, 4);
  EXPECT_THROW(decode_embedding(bytes), ValidationError);
}

TEST(Tsne, PreconditionErrors) {
  EXPECT_THROW(tsne_project(EmbeddingMatrix(2, 3, {1, 2, 3, 4, 5, 6}), 30.0, 1000, 0),
               ConfigError);
  EXPECT_THROW(tsne_project(gaussian_blobs(20, 2, 4, 1), 5.0, 100, 0), ConfigError);
  auto m = gaussian_blobs(20, 2, 4, 1);
  m(3, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(tsne_project(m, 5.0, 300, 0), ValidationError);
}

TEST(Tsne, AffinitiesMatchTargetPerplexity) {
  const auto m = gaussian_blobs(30, 2, 5, 3);
  const std::size_t n = m.rows();
  const auto p = detail::conditional_affinities(detail::squared_distances(m), n, 10.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0, h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p[i * n + j];
      sum += v;
      if (v > 0) h -= v * std::log(v);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(std::exp(h), 10.0, 1e-3);
    EXPECT_EQ(p[i * n + i], 0.0);
  }
}

TEST(Tsne, DeterministicAndMakesProgress) {
  const auto m = gaussian_blobs(25, 3, 6, 4);
  const auto a = tsne_project(m, 8.0, 300, 7), b = tsne_project(m, 8.0, 300, 7);
  ASSERT_EQ(a.points.size(), m.rows());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i][0], b.points[i][0]);
    EXPECT_EQ(a.points[i][1], b.points[i][1]);
  }
  EXPECT_LT(a.final_kl, a.first_kl);
  EXPECT_GE(a.final_kl, 0.0);
}

// Runs that continue past the 250 exaggerated iterations end below the KL of
// the first step.
TEST(Tsne, KlDecreasesOnRandomInputs) {
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 10 + rng.index(90);
    EmbeddingMatrix m(n, 8);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < 8; ++d) m(i, d) = rng.normal();
    const double perplexity = std::min(30.0, (static_cast<double>(n) - 1) / 3.0 - 0.5);
    const auto r = tsne_project(m, perplexity, 1000, rep);
    EXPECT_LT(r.final_kl, r.first_kl) << "n=" << n;
  }
}

// Three mutually equidistant points (a simplex) stay equidistant.
TEST(Tsne, EquidistantPointsStayEquidistant) {
  EmbeddingMatrix m(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  TsneOptions opt;
  opt.perplexity = 0.9;
  opt.iterations = 1000;
  const auto r = tsne_project(m, opt);
  auto d = [&](int i, int j) {
    return std::hypot(r.points[i][0] - r.points[j][0], r.points[i][1] - r.points[j][1]);
  };
  const double d01 = d(0, 1), d02 = d(0, 2), d12 = d(1, 2);
  const double mean = (d01 + d02 + d12) / 3;
  for (double v : {d01, d02, d12}) EXPECT_NEAR(v, mean, 0.05 * mean);
}

TEST(Tsne, SeparatedBlobsClusterApart) {
  const auto m = gaussian_blobs(60, 3, 6, 9);
  const auto proj = tsne_project(m, 30.0, 1000, 0);
  const auto labels = cluster_points(proj, 2.0, 8);
  std::set<int> ids(labels.begin(), labels.end());
  ids.erase(kNoise);
  EXPECT_EQ(ids.size(), 3u);
  for (std::size_t b = 0; b < 3; ++b) {
    std::map<int, int> votes;
    for (std::size_t i = 0; i < 60; ++i) ++votes[labels[b * 60 + i]];
    int best = 0;
    for (const auto &[id, c] : votes)
      if (id != kNoise) best = std::max(best, c);
    EXPECT_GE(best, 57) << "blob " << b;
  }
}

Projection2D projection(std::vector<std::array<double, 2>> pts) {
  Projection2D p;
  p.points = std::move(pts);
  return p;
}

TEST(Dbscan, Examples) {
  EXPECT_TRUE(cluster_points(projection({}), 1.0, 3).empty());
  const auto one = cluster_points(projection({{0, 0}, {0.1, 0}, {0, 0.1}, {0.1, 0.1}}), 1.0, 4);
  EXPECT_EQ(one, std::vector<int>(4, 0));
  const auto iso = cluster_points(projection({{0, 0}, {0.5, 0}, {10, 10}}), 1.0, 2);
  EXPECT_EQ(iso, (std::vector<int>{0, 0, kNoise}));
  const auto two =
      cluster_points(projection({{0, 0}, {0.5, 0}, {50, 0}, {50.5, 0}, {0.2, 0.2}}), 1.0, 2);
  EXPECT_EQ(two, (std::vector<int>{0, 0, 1, 1, 0}));
  EXPECT_THROW(cluster_points(projection({{0, 0}}), 0.0, 2), ConfigError);
  EXPECT_THROW(cluster_points(projection({{0, 0}}), 1.0, 0), ConfigError);
}

TEST(Dbscan, MatchesUnionFindOracle) {
  Rng rng(10);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rng.index(200);
    std::vector<std::array<double, 2>> pts(n);
    const double spread = rng.uniform(1.0, 15.0);
    for (auto &p : pts) {
      // Snap to a grid so that exact eps distances occur.
      p = {std::round(rng.normal(0, spread) * 2) / 2, std::round(rng.normal(0, spread) * 2) / 2};
    }
    const double eps = 0.5 * static_cast<double>(1 + rng.index(4));
    const std::size_t min_pts = 1 + rng.index(8);
    EXPECT_EQ(cluster_points(projection(pts), eps, min_pts),
              testing::brute_force_dbscan(pts, eps, min_pts))
        << "rep " << rep;
  }
}

std::vector<UtteranceRecord> numbered_records(std::size_t n) {
  std::vector<UtteranceRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].id = "r" + std::to_string(i);
  return out;
}

TEST(CapClusters, Examples) {
  const auto records = numbered_records(120);
  std::vector<int> labels(120, kNoise);
  for (int i = 0; i < 100; ++i) labels[i] = 0;
  const auto out = cap_clusters(records, labels, 20, 3);
  EXPECT_EQ(out.size(), 40u);
  EXPECT_EQ(cap_clusters(records, std::vector<int>(120, kNoise), 1, 3).size(), 120u);
  EXPECT_EQ(cap_clusters(records, labels, 100, 3).size(), 120u);
  EXPECT_THROW(cap_clusters(records, std::vector<int>(3, 0), 1, 0), ValidationError);
}

TEST(CapClusters, SizeFormulaOrderAndDeterminism) {
  Rng rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.index(150);
    const auto records = numbered_records(n);
    std::vector<int> labels(n);
    const int k = 1 + static_cast<int>(rng.index(6));
    for (auto &l : labels) l = static_cast<int>(rng.index(k + 1)) - 1;
    const std::size_t cap = rng.index(30);
    const auto out = cap_clusters(records, labels, cap, rep);

    std::map<int, std::size_t> sizes;
    for (int l : labels) ++sizes[l];
    std::size_t expected = 0;
    for (const auto &[id, s] : sizes) expected += id == kNoise ? s : std::min(s, cap);
    ASSERT_EQ(out.size(), expected);

    std::map<int, std::size_t> kept;
    std::size_t cursor = 0;
    for (const auto &r : out) {
      const std::size_t idx = std::stoul(r.id.substr(1));
      EXPECT_GE(idx, cursor);  // input order preserved
      cursor = idx + 1;
      ++kept[labels[idx]];
    }
    for (const auto &[id, s] : sizes)
      EXPECT_EQ(kept[id], id == kNoise ? s : std::min(s, cap));
    const auto again = cap_clusters(records, labels, cap, rep);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].id, again[i].id);
  }
}

// Each member of a capped cluster survives with probability cap/size.
TEST(CapClusters, SelectionIsUniform) {
  const auto records = numbered_records(10);
  const std::vector<int> labels(10, 0);
  std::vector<int> hits(10, 0);
  const int reps = 4000;
  for (int s = 0; s < reps; ++s)
    for (const auto &r : cap_clusters(records, labels, 3, s)) ++hits[std::stoul(r.id.substr(1))];
  const double p = 0.3, se = std::sqrt(p * (1 - p) / reps);
  for (int h : hits) EXPECT_NEAR(h / double(reps), p, 4 * se);
}

}  // namespace
}  // namespace stylerank

// stylerank/pairing.hpp

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

// Sparse A/B pair construction. Each utterance gets a shortlist of partners
// that are lexically close (transcript cosine >= min_text_sim) but unlikely to
// share a speaker (speaker cosine <= max_speaker_sim), ranked by a weighted
// sum of the two similarities. Pairs are then added greedily in round-robin
// passes over a seeded utterance order: first cross-source only, and only if
// the quota is still open, same-source.

#ifndef STYLERANK_PAIRING_HPP_
#define STYLERANK_PAIRING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stylerank/corpus.hpp"
#include "stylerank/embedding.hpp"
#include "stylerank/error.hpp"
#include "stylerank/lineformat.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

struct PairingConfig {
  double min_text_sim = 0.2;
  double max_speaker_sim = 0.75;
  double weight_text = 0.5;
  double weight_speaker = 0.5;
  std::size_t quota = 0;
  std::size_t shortlist_size = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(weight_text >= 0.0 && weight_speaker >= 0.0 &&
          weight_text + weight_speaker > 0.0))
      throw ConfigError("pairing: weights must be >= 0 with a positive sum");
    if (!std::isfinite(min_text_sim) || !std::isfinite(max_speaker_sim))
      throw ConfigError("pairing: thresholds must be finite");
  }
};

struct ComparisonPair {
  std::string pair_id;
  std::string utt_a;
  std::string utt_b;
  Split split = Split::kTrain;
  bool cross_source = false;
  double text_sim = 0.0;
  double speaker_sim = 0.0;
};

inline double cosine_similarity(std::span<const double> u,
                                std::span<const double> v) {
  if (u.size() != v.size())
    throw ShapeError("cosine_similarity: dimension mismatch (" +
                     std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0)
    throw DomainError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

enum class SourceFilter { kAny, kCrossSource, kSameSource };

struct Candidate {
  std::string id;
  std::size_t index = 0;  // position in the pool
  double score = 0.0;
  double text_sim = 0.0;
  double speaker_sim = 0.0;
};

namespace detail {

// Pairwise text and speaker similarities over a pool, computed once.
class SimilarityTable {
 public:
  SimilarityTable(const std::vector<UtteranceRecord> &pool,
                  const EmbeddingMatrix &text_emb,
                  const EmbeddingMatrix &spk_emb)
      : n_(pool.size()), text_(n_ * n_, 1.0), speaker_(n_ * n_, 1.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      auto ti = text_emb.row(pool[i].text_embedding_ref);
      auto si = spk_emb.row(pool[i].speaker_embedding_ref);
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double t =
            cosine_similarity(ti, text_emb.row(pool[j].text_embedding_ref));
        const double s =
            cosine_similarity(si, spk_emb.row(pool[j].speaker_embedding_ref));
        text_[i * n_ + j] = text_[j * n_ + i] = t;
        speaker_[i * n_ + j] = speaker_[j * n_ + i] = s;
      }
    }
  }
  double text(std::size_t i, std::size_t j) const { return text_[i * n_ + j]; }
  double speaker(std::size_t i, std::size_t j) const {
    return speaker_[i * n_ + j];
  }

 private:
  std::size_t n_;
  std::vector<double> text_, speaker_;
};

// Threshold screen plus ranking. `sims(j)` yields (text_sim, speaker_sim)
// between the target and pool[j].
template <typename SimFn>
std::vector<Candidate> rank_candidates(std::size_t target,
                                       const std::vector<UtteranceRecord> &pool,
                                       const PairingConfig &cfg,
                                       SourceFilter filter, SimFn &&sims) {
  std::vector<Candidate> out;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (j == target) continue;
    const bool cross = pool[j].source != pool[target].source;
    if (filter == SourceFilter::kCrossSource && !cross) continue;
    if (filter == SourceFilter::kSameSource && cross) continue;
    const auto [t, s] = sims(j);
    if (t < cfg.min_text_sim || s > cfg.max_speaker_sim) continue;
    out.push_back({pool[j].id, j, cfg.weight_text * t + cfg.weight_speaker * s,
                   t, s});
  }
  std::sort(out.begin(), out.end(), [](const Candidate &a, const Candidate &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (out.size() > cfg.shortlist_size) out.resize(cfg.shortlist_size);
  return out;
}

}  // namespace detail

/// Ranked partner shortlist for `target` (descending combined score, ties by
/// id ascending), after the text/speaker threshold screen.
inline std::vector<Candidate> candidate_shortlist(
    const std::string &target, const std::vector<UtteranceRecord> &pool,
    const EmbeddingMatrix &text_emb, const EmbeddingMatrix &spk_emb,
    const PairingConfig &cfg, SourceFilter filter = SourceFilter::kAny) {
  cfg.validate();
  auto it = std::find_if(pool.begin(), pool.end(),
                         [&](const UtteranceRecord &r) { return r.id == target; });
  if (it == pool.end())
    throw LookupError("candidate_shortlist: '" + target + "' not in pool");
  const std::size_t t = static_cast<std::size_t>(it - pool.begin());
  const auto text_t = text_emb.row(pool[t].text_embedding_ref);
  const auto spk_t = spk_emb.row(pool[t].speaker_embedding_ref);
  return detail::rank_candidates(t, pool, cfg, filter, [&](std::size_t j) {
    return std::pair{
        cosine_similarity(text_t, text_emb.row(pool[j].text_embedding_ref)),
        cosine_similarity(spk_t, spk_emb.row(pool[j].speaker_embedding_ref))};
  });
}

struct PairingResult {
  std::vector<ComparisonPair> pairs;
  /// quota - pairs.size(); nonzero when the quota could not be met.
  std::size_t shortfall = 0;
  /// Number of pairs added in the cross-source phase (a prefix of `pairs`).
  std::size_t cross_phase_pairs = 0;
};

/// Two-phase greedy pair construction over a single-split pool.
inline PairingResult build_pairs(const std::vector<UtteranceRecord> &pool,
                                 const EmbeddingMatrix &text_emb,
                                 const EmbeddingMatrix &spk_emb,
                                 const PairingConfig &cfg) {
  cfg.validate();
  if (pool.size() < 2) throw DomainError("build_pairs: pool needs >= 2 utterances");
  const Split split = pool.front().split;
  if (split == Split::kUnassigned)
    throw ValidationError("build_pairs: pool split must be train or test");
  {
    std::set<std::string> ids;
    for (const auto &r : pool) {
      if (r.split != split)
        throw ValidationError("build_pairs: pool mixes splits ('" + r.id + "')");
      if (!ids.insert(r.id).second)
        throw ValidationError("build_pairs: duplicate id '" + r.id + "'");
    }
  }

  const detail::SimilarityTable sims(pool, text_emb, spk_emb);
  const std::size_t n = pool.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  rng.shuffle(std::span<std::size_t>(order));

  PairingResult result;
  std::set<std::pair<std::size_t, std::size_t>> used;
  auto run_phase = [&](SourceFilter filter) {
    std::vector<std::vector<Candidate>> lists(n);
    for (std::size_t i = 0; i < n; ++i)
      lists[i] = detail::rank_candidates(i, pool, cfg, filter, [&](std::size_t j) {
        return std::pair{sims.text(i, j), sims.speaker(i, j)};
      });
    while (result.pairs.size() < cfg.quota) {
      bool added = false;
      for (std::size_t i : order) {
        if (result.pairs.size() >= cfg.quota) break;
        for (const Candidate &c : lists[i]) {
          const auto key = std::minmax(i, c.index);
          if (!used.insert(key).second) continue;
          ComparisonPair p;
          char id[32];
          std::snprintf(id, sizeof id, "%s-%06zu", split_name(split),
                        result.pairs.size() + 1);
          p.pair_id = id;
          p.utt_a = pool[i].id;
          p.utt_b = c.id;
          p.split = split;
          p.cross_source = pool[i].source != pool[c.index].source;
          p.text_sim = c.text_sim;
          p.speaker_sim = c.speaker_sim;
          result.pairs.push_back(std::move(p));
          added = true;
          break;
        }
      }
      if (!added) break;
    }
  };
  run_phase(SourceFilter::kCrossSource);
  result.cross_phase_pairs = result.pairs.size();
  run_phase(SourceFilter::kSameSource);
  result.shortfall = cfg.quota - result.pairs.size();
  return result;
}

inline Json pair_to_json(const ComparisonPair &p) {
  Json o;
  o["pair_id"] = p.pair_id;
  o["utt_a"] = p.utt_a;
  o["utt_b"] = p.utt_b;
  o["split"] = split_name(p.split);
  o["cross_source"] = p.cross_source;
  o["text_sim"] = p.text_sim;
  o["speaker_sim"] = p.speaker_sim;
  return o;
}

inline ComparisonPair pair_from_line(const Line &line) {
  ComparisonPair p;
  p.pair_id = get_string(line, "pair_id");
  p.utt_a = get_string(line, "utt_a");
  p.utt_b = get_string(line, "utt_b");
  p.split = parse_split(get_string(line, "split"), line.number);
  p.cross_source = get_bool(line, "cross_source");
  p.text_sim = get_number(line, "text_sim");
  p.speaker_sim = get_number(line, "speaker_sim");
  if (p.utt_a == p.utt_b)
    throw ValidationError("line " + std::to_string(line.number) +
                          ": pair has identical sides");
  return p;
}

inline std::vector<ComparisonPair> load_pairs(const std::filesystem::path &path) {
  std::vector<ComparisonPair> out;
  std::set<std::string> ids;
  std::set<std::pair<std::string, std::string>> sides;
  for (const auto &line : read_lines(path)) {
    out.push_back(pair_from_line(line));
    const auto &p = out.back();
    if (!ids.insert(p.pair_id).second)
      throw ValidationError("line " + std::to_string(line.number) +
                            ": duplicate pair_id '" + p.pair_id + "'");
    if (!sides.insert(std::minmax(p.utt_a, p.utt_b)).second)
      throw ValidationError("line " + std::to_string(line.number) +
                            ": duplicate unordered pair");
  }
  return out;
}

inline void save_pairs(const std::filesystem::path &path,
                       const std::vector<ComparisonPair> &pairs) {
  std::vector<Json> lines;
  for (const auto &p : pairs) lines.push_back(pair_to_json(p));
  write_lines(path, lines);
}

}  // namespace stylerank

#endif  // STYLERANK_PAIRING_HPP_

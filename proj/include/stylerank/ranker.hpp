// stylerank/ranker.hpp

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

// Utterance scorer trained from pairwise preferences. A sequence of frame
// features is aggregated (identity or a single-layer bidirectional LSTM),
// averaged over time, and mapped to a scalar by an MLP with tanh hidden
// layers. Training minimizes -log sigmoid(s_winner - s_loser).

#ifndef STYLERANK_RANKER_HPP_
#define STYLERANK_RANKER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stylerank/acoustics.hpp"
#include "stylerank/embedding.hpp"
#include "stylerank/error.hpp"
#include "stylerank/judgment.hpp"
#include "stylerank/metrics.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

enum class Aggregator : std::uint32_t { kMeanPool = 0, kRecurrent = 1 };

inline const char *aggregator_name(Aggregator a) {
  return a == Aggregator::kMeanPool ? "mean_pool" : "recurrent";
}

inline Aggregator parse_aggregator(const std::string &s) {
  if (s == "mean_pool") return Aggregator::kMeanPool;
  if (s == "recurrent") return Aggregator::kRecurrent;
  throw ConfigError("unknown aggregator '" + s + "' (mean_pool|recurrent)");
}

struct ModelConfig {
  Aggregator aggregator = Aggregator::kMeanPool;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 128;            // per LSTM direction
  std::vector<std::size_t> mlp_dims{64, 1};  // must end in 1

  void validate() const {
    if (input_dim == 0) throw ConfigError("model: input_dim must be > 0");
    if (mlp_dims.empty() || mlp_dims.back() != 1)
      throw ConfigError("model: mlp dims must end in 1");
    for (auto d : mlp_dims)
      if (d == 0) throw ConfigError("model: mlp layer sizes must be > 0");
    if (aggregator == Aggregator::kRecurrent && hidden_dim == 0)
      throw ConfigError("model: recurrent hidden_dim must be > 0");
  }
};

/// Frame features of one utterance: T' x D, row per frame.
using FeatureSequence = Eigen::MatrixXd;

class ScoreModel {
 public:
  ScoreModel() = default;

  /// Model with every parameter zero.
  explicit ScoreModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    params_.assign(layout_size(), 0.0);
  }

  const ModelConfig &config() const { return cfg_; }
  std::vector<double> &params() { return params_; }
  const std::vector<double> &params() const { return params_; }

  std::size_t representation_dim() const {
    return recurrent() ? 2 * cfg_.hidden_dim : cfg_.input_dim;
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    std::size_t off = 0;
    auto fill = [&](std::size_t count, std::size_t fan_in) {
      const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < count; ++i) params_[off++] = rng.uniform(-r, r);
    };
    if (recurrent()) {
      const std::size_t h = cfg_.hidden_dim, d = cfg_.input_dim;
      for (int dir = 0; dir < 2; ++dir) {
        fill(4 * h * d, d);
        fill(4 * h * h, h);
        fill(4 * h, h);
      }
    }
    std::size_t in = representation_dim();
    for (auto out : cfg_.mlp_dims) {
      fill(out * in + out, in);
      in = out;
    }
  }

  /// Time-averaged aggregator output.
  Eigen::VectorXd represent(const FeatureSequence &x) const {
    check_input(x);
    if (!recurrent()) return x.colwise().mean().transpose();
    LstmTrace fwd, bwd;
    run_lstm(0, x, false, fwd);
    run_lstm(1, x, true, bwd);
    const auto h = static_cast<Eigen::Index>(cfg_.hidden_dim);
    Eigen::VectorXd z(2 * h);
    z.head(h) = fwd.h.rowwise().mean();
    z.tail(h) = bwd.h.rowwise().mean();
    return z;
  }

  /// MLP applied to an aggregated representation. Without the output bias
  /// the result is the score minus a constant shared by every utterance.
  double score_representation(const Eigen::VectorXd &z,
                              bool with_output_bias = true) const {
    Eigen::VectorXd a = z;
    std::size_t off = mlp_offset();
    std::size_t in = representation_dim();
    for (std::size_t l = 0; l < cfg_.mlp_dims.size(); ++l) {
      const std::size_t out = cfg_.mlp_dims[l];
      const auto w = mat(off, out, in);
      const auto b = vec(off + out * in, out);
      const bool last = l + 1 == cfg_.mlp_dims.size();
      Eigen::VectorXd pre = w * a;
      if (!last || with_output_bias) pre += b;
      a = last ? pre : Eigen::VectorXd(pre.array().tanh());
      off += out * in + out;
      in = out;
    }
    return a[0];
  }

  double score(const FeatureSequence &x) const {
    return score_representation(represent(x));
  }

  /// score(xa) - score(xb). The output bias cancels and is left out, so the
  /// difference carries no rounding from it.
  double score_difference(const FeatureSequence &xa, const FeatureSequence &xb) const {
    return score_representation(represent(xa), false) -
           score_representation(represent(xb), false);
  }

  /// Adds dscore * d(score)/d(params) to `grad` and returns the score.
  double accumulate_gradient(const FeatureSequence &x, double dscore,
                             std::vector<double> &grad) const {
    check_input(x);
    if (!recurrent()) {
      const Eigen::VectorXd z = x.colwise().mean().transpose();
      return mlp_backward(z, dscore, grad, nullptr);
    }
    LstmTrace fwd, bwd;
    run_lstm(0, x, false, fwd);
    run_lstm(1, x, true, bwd);
    const auto h = static_cast<Eigen::Index>(cfg_.hidden_dim);
    Eigen::VectorXd z(2 * h);
    z.head(h) = fwd.h.rowwise().mean();
    z.tail(h) = bwd.h.rowwise().mean();
    Eigen::VectorXd dz;
    const double s = mlp_backward(z, dscore, grad, &dz);
    const double inv_t = 1.0 / static_cast<double>(x.rows());
    lstm_backward(0, x, fwd, dz.head(h) * inv_t, grad);
    lstm_backward(1, x, bwd, dz.tail(h) * inv_t, grad);
    return s;
  }

  /// Mean-pool models only: gradient given the pooled frame mean.
  double accumulate_gradient_pooled(const Eigen::VectorXd &z, double dscore,
                                    std::vector<double> &grad) const {
    return mlp_backward(z, dscore, grad, nullptr);
  }

  bool recurrent() const { return cfg_.aggregator == Aggregator::kRecurrent; }

 private:
  struct LstmTrace {
    // Columns indexed by processing step.
    Eigen::MatrixXd i, f, g, o, c, h;
  };

  std::size_t lstm_block() const {
    const std::size_t h = cfg_.hidden_dim, d = cfg_.input_dim;
    return 4 * h * d + 4 * h * h + 4 * h;
  }
  std::size_t mlp_offset() const { return recurrent() ? 2 * lstm_block() : 0; }
  std::size_t layout_size() const {
    std::size_t n = mlp_offset();
    std::size_t in = representation_dim();
    for (auto out : cfg_.mlp_dims) {
      n += out * in + out;
      in = out;
    }
    return n;
  }

  Eigen::Map<const Eigen::MatrixXd> mat(std::size_t off, std::size_t rows,
                                        std::size_t cols) const {
    return {params_.data() + off, static_cast<Eigen::Index>(rows),
            static_cast<Eigen::Index>(cols)};
  }
  Eigen::Map<const Eigen::VectorXd> vec(std::size_t off, std::size_t n) const {
    return {params_.data() + off, static_cast<Eigen::Index>(n)};
  }
  static Eigen::Map<Eigen::MatrixXd> gmat(std::vector<double> &g, std::size_t off,
                                          std::size_t rows, std::size_t cols) {
    return {g.data() + off, static_cast<Eigen::Index>(rows),
            static_cast<Eigen::Index>(cols)};
  }
  static Eigen::Map<Eigen::VectorXd> gvec(std::vector<double> &g, std::size_t off,
                                          std::size_t n) {
    return {g.data() + off, static_cast<Eigen::Index>(n)};
  }

  void check_input(const FeatureSequence &x) const {
    if (x.rows() < 1) throw ShapeError("score: feature sequence has no frames");
    if (static_cast<std::size_t>(x.cols()) != cfg_.input_dim)
      throw ShapeError("score: feature dim " + std::to_string(x.cols()) +
                       " != model input dim " + std::to_string(cfg_.input_dim));
  }

  // Gates are stacked [i; f; g; o] in the 4H rows of W, U and b.
  void run_lstm(int dir, const FeatureSequence &x, bool reverse,
                LstmTrace &tr) const {
    const std::size_t hd = cfg_.hidden_dim, d = cfg_.input_dim;
    const auto h = static_cast<Eigen::Index>(hd);
    const std::size_t base = static_cast<std::size_t>(dir) * lstm_block();
    const auto w = mat(base, 4 * hd, d);
    const auto u = mat(base + 4 * hd * d, 4 * hd, hd);
    const auto b = vec(base + 4 * hd * d + 4 * hd * hd, 4 * hd);
    const auto steps = x.rows();
    for (auto *m : {&tr.i, &tr.f, &tr.g, &tr.o, &tr.c, &tr.h}) m->resize(h, steps);
    Eigen::VectorXd hp = Eigen::VectorXd::Zero(h), cp = Eigen::VectorXd::Zero(h);
    for (Eigen::Index s = 0; s < steps; ++s) {
      const Eigen::Index t = reverse ? steps - 1 - s : s;
      const Eigen::VectorXd pre = w * x.row(t).transpose() + u * hp + b;
      auto sig = [](const auto &v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); };
      tr.i.col(s) = sig(pre.segment(0, h));
      tr.f.col(s) = sig(pre.segment(h, h));
      tr.g.col(s) = pre.segment(2 * h, h).array().tanh().matrix();
      tr.o.col(s) = sig(pre.segment(3 * h, h));
      tr.c.col(s) = tr.f.col(s).cwiseProduct(cp) + tr.i.col(s).cwiseProduct(tr.g.col(s));
      tr.h.col(s) = tr.o.col(s).cwiseProduct(tr.c.col(s).array().tanh().matrix());
      hp = tr.h.col(s);
      cp = tr.c.col(s);
    }
  }

  // dh_each: gradient of the loss w.r.t. every h_s (identical across steps
  // because of the time mean).
  void lstm_backward(int dir, const FeatureSequence &x, const LstmTrace &tr,
                     const Eigen::VectorXd &dh_each, std::vector<double> &grad) const {
    const std::size_t hd = cfg_.hidden_dim, d = cfg_.input_dim;
    const auto h = static_cast<Eigen::Index>(hd);
    const std::size_t base = static_cast<std::size_t>(dir) * lstm_block();
    const auto u = mat(base + 4 * hd * d, 4 * hd, hd);
    auto gw = gmat(grad, base, 4 * hd, d);
    auto gu = gmat(grad, base + 4 * hd * d, 4 * hd, hd);
    auto gb = gvec(grad, base + 4 * hd * d + 4 * hd * hd, 4 * hd);
    const auto steps = x.rows();
    const bool reverse = dir == 1;
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h), dc_next = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd dpre(4 * h);
    for (Eigen::Index s = steps - 1; s >= 0; --s) {
      const Eigen::Index t = reverse ? steps - 1 - s : s;
      const Eigen::ArrayXd i = tr.i.col(s), f = tr.f.col(s), g = tr.g.col(s),
                           o = tr.o.col(s);
      const Eigen::ArrayXd tc = tr.c.col(s).array().tanh();
      const Eigen::ArrayXd dh = (dh_each + dh_next).array();
      const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
      const Eigen::ArrayXd c_prev =
          s > 0 ? Eigen::ArrayXd(tr.c.col(s - 1)) : Eigen::ArrayXd::Zero(h);
      dpre.segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
      dpre.segment(h, h) = (dc * c_prev * f * (1.0 - f)).matrix();
      dpre.segment(2 * h, h) = (dc * i * (1.0 - g.square())).matrix();
      dpre.segment(3 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
      gw.noalias() += dpre * x.row(t);
      if (s > 0) gu.noalias() += dpre * tr.h.col(s - 1).transpose();
      gb += dpre;
      dh_next = u.transpose() * dpre;
      dc_next = (dc * f).matrix();
    }
  }

  double mlp_backward(const Eigen::VectorXd &z, double dscore, std::vector<double> &grad,
                      Eigen::VectorXd *dz) const {
    const std::size_t layers = cfg_.mlp_dims.size();
    std::vector<Eigen::VectorXd> acts{z};
    std::vector<std::size_t> offs;
    std::size_t off = mlp_offset(), in = representation_dim();
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t out = cfg_.mlp_dims[l];
      offs.push_back(off);
      Eigen::VectorXd pre = mat(off, out, in) * acts.back() + vec(off + out * in, out);
      acts.push_back(l + 1 < layers ? Eigen::VectorXd(pre.array().tanh()) : pre);
      off += out * in + out;
      in = out;
    }
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, dscore);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t out = cfg_.mlp_dims[l];
      const std::size_t fan = static_cast<std::size_t>(acts[l].size());
      gmat(grad, offs[l], out, fan).noalias() += delta * acts[l].transpose();
      gvec(grad, offs[l] + out * fan, out) += delta;
      Eigen::VectorXd back = mat(offs[l], out, fan).transpose() * delta;
      if (l > 0)
        delta = back.array() * (1.0 - acts[l].array().square());
      else if (dz)
        *dz = back;
    }
    return acts.back()[0];
  }

  ModelConfig cfg_;
  std::vector<double> params_;
};

/// sigma(score(a) - score(b)): probability that a is preferred.
inline double pair_probability(const ScoreModel &m, const FeatureSequence &xa,
                               const FeatureSequence &xb) {
  return sigmoid(m.score_difference(xa, xb));
}

/// Pairwise loss -log sigma(+-(s_a - s_b)); adds its gradient into `grad`.
inline double pair_loss_and_gradient(const ScoreModel &m, const FeatureSequence &xa,
                                     const FeatureSequence &xb, bool a_wins,
                                     std::vector<double> &grad, double weight = 1.0) {
  // Two passes: the score difference is needed before the backward scale.
  const double d = m.score_difference(xa, xb);
  const double signed_d = a_wins ? d : -d;
  const double dl_dd = (a_wins ? -1.0 : 1.0) * sigmoid(-signed_d);
  m.accumulate_gradient(xa, weight * dl_dd, grad);
  m.accumulate_gradient(xb, -weight * dl_dd, grad);
  return -log_sigmoid(signed_d);
}

inline double pair_loss(const ScoreModel &m, const FeatureSequence &xa,
                        const FeatureSequence &xb, bool a_wins) {
  const double d = m.score_difference(xa, xb);
  return -log_sigmoid(a_wins ? d : -d);
}

/// Largest relative discrepancy |a - n| / max(1e-8, |a| + |n|) between the
/// analytic gradient and central differences over every parameter.
inline double gradient_check(const ScoreModel &m, const FeatureSequence &xa,
                             const FeatureSequence &xb, bool a_wins,
                             double epsilon = 1e-5) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
    throw DomainError("gradient_check: epsilon must lie in [1e-7, 1e-3]");
  std::vector<double> analytic(m.params().size(), 0.0);
  pair_loss_and_gradient(m, xa, xb, a_wins, analytic);
  ScoreModel probe = m;
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double orig = probe.params()[k];
    probe.params()[k] = orig + epsilon;
    const double up = pair_loss(probe, xa, xb, a_wins);
    probe.params()[k] = orig - epsilon;
    const double down = pair_loss(probe, xa, xb, a_wins);
    probe.params()[k] = orig;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double rel = std::abs(analytic[k] - numeric) /
                       std::max(1e-8, std::abs(analytic[k]) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Feature store

/// Frame features per utterance id, with cached time means.
class FeatureStore {
 public:
  FeatureStore() = default;

  /// Reads `<id>.fse` files from `dir` on first access.
  static FeatureStore from_directory(const std::filesystem::path &dir) {
    FeatureStore s;
    s.dir_ = dir;
    return s;
  }

  /// One-frame sequences from proxy vectors, each proxy z-scored over the
  /// complete vectors in the table. Incomplete vectors are left out.
  static FeatureStore from_proxies(const ProxyTable &table) {
    FeatureStore s;
    std::vector<const std::pair<const std::string, ProxyVector> *> rows;
    for (const auto &entry : table)
      if (entry.second.complete()) rows.push_back(&entry);
    if (rows.size() < 2) throw DomainError("feature store: need >= 2 complete proxy vectors");
    Eigen::MatrixXd all(static_cast<Eigen::Index>(rows.size()), kNumProxies);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t k = 0; k < kNumProxies; ++k)
        all(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
            *rows[r]->second.values[k];
    const Eigen::RowVectorXd mean = all.colwise().mean();
    Eigen::RowVectorXd sd =
        ((all.rowwise() - mean).array().square().colwise().sum() /
         static_cast<double>(rows.size() - 1))
            .sqrt();
    for (Eigen::Index k = 0; k < sd.size(); ++k)
      if (!(sd[k] > 0.0)) sd[k] = 1.0;
    for (std::size_t r = 0; r < rows.size(); ++r)
      s.insert(rows[r]->first,
               ((all.row(static_cast<Eigen::Index>(r)) - mean).array() / sd.array()).matrix());
    return s;
  }

  void insert(const std::string &id, FeatureSequence frames) {
    if (frames.rows() < 1) throw ShapeError("feature store: '" + id + "' has no frames");
    if (!frames.allFinite()) throw ValidationError("feature store: '" + id + "' not finite");
    Entry e;
    e.pooled = frames.colwise().mean().transpose();
    e.frames = std::move(frames);
    entries_[id] = std::move(e);
  }

  const FeatureSequence &frames(const std::string &id) { return entry(id).frames; }
  const Eigen::VectorXd &pooled(const std::string &id) { return entry(id).pooled; }
  bool contains(const std::string &id) {
    if (entries_.count(id)) return true;
    return !dir_.empty() && std::filesystem::exists(dir_ / (id + ".fse"));
  }

  /// Feature dimension of `id` (loading it if needed).
  std::size_t dims(const std::string &id) {
    return static_cast<std::size_t>(entry(id).frames.cols());
  }

 private:
  struct Entry {
    FeatureSequence frames;
    Eigen::VectorXd pooled;
  };

  Entry &entry(const std::string &id) {
    auto it = entries_.find(id);
    if (it != entries_.end()) return it->second;
    if (dir_.empty()) throw LookupError("feature store: no features for '" + id + "'");
    const auto path = dir_ / (id + ".fse");
    if (!std::filesystem::exists(path))
      throw LookupError("feature store: missing " + path.string());
    const auto emb = load_embedding(path);
    FeatureSequence x(static_cast<Eigen::Index>(emb.rows()),
                      static_cast<Eigen::Index>(emb.dims()));
    for (std::size_t r = 0; r < emb.rows(); ++r)
      for (std::size_t c = 0; c < emb.dims(); ++c)
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = emb(r, c);
    insert(id, std::move(x));
    return entries_.at(id);
  }

  std::filesystem::path dir_;
  std::map<std::string, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Training and evaluation

/// One judged comparison: utt_a vs utt_b, true when utt_a won.
struct PairOutcome {
  std::string utt_a;
  std::string utt_b;
  bool a_wins = false;
};

inline std::vector<PairOutcome> outcomes_from_judgments(
    const std::vector<JudgmentRecord> &judgments,
    const std::vector<ComparisonPair> &pairs) {
  const PairIndex index(pairs);
  std::vector<PairOutcome> out;
  out.reserve(judgments.size());
  for (const auto &j : judgments) {
    const auto &p = index.at(j.pair_id);
    out.push_back({p.utt_a, p.utt_b, j.choice == Slot::kA});
  }
  return out;
}

/// Keeps outcomes whose pair belongs to `split`.
inline std::vector<PairOutcome> outcomes_for_split(
    const std::vector<JudgmentRecord> &judgments,
    const std::vector<ComparisonPair> &pairs, Split split) {
  std::vector<ComparisonPair> kept;
  for (const auto &p : pairs)
    if (p.split == split) kept.push_back(p);
  const PairIndex index(kept);
  std::vector<JudgmentRecord> sel;
  for (const auto &j : judgments)
    if (index.contains(j.pair_id)) sel.push_back(j);
  return outcomes_from_judgments(sel, kept);
}

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  std::size_t patience = 10;
  double valid_fraction = 0.1;
  double momentum = 0.9;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (batch_size == 0) throw ConfigError("train: batch_size must be > 0");
    if (epochs == 0) throw ConfigError("train: epochs must be > 0");
    if (!(l2 >= 0.0)) throw ConfigError("train: l2 must be >= 0");
    if (patience == 0) throw ConfigError("train: patience must be > 0");
    if (!(valid_fraction >= 0.0 && valid_fraction < 1.0))
      throw ConfigError("train: valid_fraction must lie in [0, 1)");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw ConfigError("train: momentum must lie in [0, 1)");
  }
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_nll = 0.0;
  std::optional<double> valid_nll;
};

struct TrainResult {
  ScoreModel model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
};

inline std::string training_log_csv(const std::vector<EpochLog> &log) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_nll,valid_nll\n";
  for (const auto &e : log) {
    os << e.epoch << ',' << e.train_nll << ',';
    if (e.valid_nll) os << *e.valid_nll;
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline double mean_pair_nll(const ScoreModel &m, FeatureStore &store,
                            const std::vector<PairOutcome> &data) {
  double total = 0.0;
  for (const auto &d : data) {
    const double diff =
        m.recurrent() ? m.score_difference(store.frames(d.utt_a), store.frames(d.utt_b))
                      : m.score_representation(store.pooled(d.utt_a), false) -
                            m.score_representation(store.pooled(d.utt_b), false);
    total -= log_sigmoid(d.a_wins ? diff : -diff);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace detail

/// Mini-batch SGD with momentum on mean pairwise loss + (l2 / 2)|params|^2.
/// A seeded `valid_fraction` of the outcomes is held out for early stopping;
/// the parameters of the best validation epoch are returned.
inline TrainResult train_ranker(const std::vector<PairOutcome> &outcomes,
                                FeatureStore &store, ModelConfig model_cfg,
                                const TrainConfig &cfg) {
  cfg.validate();
  if (outcomes.empty()) throw DomainError("train_ranker: no training pairs");
  if (model_cfg.input_dim == 0) model_cfg.input_dim = store.dims(outcomes.front().utt_a);
  for (const auto &o : outcomes) {
    store.frames(o.utt_a);
    store.frames(o.utt_b);
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  auto n_valid = static_cast<std::size_t>(cfg.valid_fraction * static_cast<double>(outcomes.size()));
  if (cfg.valid_fraction > 0.0 && n_valid == 0 && outcomes.size() > 1) n_valid = 1;
  std::vector<PairOutcome> valid, train;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_valid ? valid : train).push_back(outcomes[order[i]]);

  TrainResult result;
  result.model = ScoreModel(model_cfg);
  result.model.initialize(rng.next_u64());
  ScoreModel &m = result.model;
  ScoreModel best = m;
  double best_valid = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  auto record = [&](std::size_t epoch) {
    EpochLog e;
    e.epoch = epoch;
    e.train_nll = detail::mean_pair_nll(m, store, train);
    if (!std::isfinite(e.train_nll))
      throw Error("train_ranker: non-finite training loss at epoch " +
                  std::to_string(epoch) + " (lower learning_rate?)");
    if (!valid.empty()) e.valid_nll = detail::mean_pair_nll(m, store, valid);
    result.log.push_back(e);
    const double criterion = e.valid_nll.value_or(e.train_nll);
    if (criterion < best_valid) {
      best_valid = criterion;
      best = m;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
  };
  record(0);

  const std::size_t n_params = m.params().size();
  std::vector<double> velocity(n_params, 0.0), grad(n_params);
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(idx.size(), start + cfg.batch_size);
      const double w = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto &o = train[idx[k]];
        // Random orientation so neither slot is systematically the winner.
        const bool flip = rng.bernoulli(0.5);
        const auto &ua = flip ? o.utt_b : o.utt_a;
        const auto &ub = flip ? o.utt_a : o.utt_b;
        const bool a_wins = flip ? !o.a_wins : o.a_wins;
        if (m.recurrent()) {
          pair_loss_and_gradient(m, store.frames(ua), store.frames(ub), a_wins, grad, w);
        } else {
          const auto &za = store.pooled(ua), &zb = store.pooled(ub);
          const double d =
              m.score_representation(za, false) - m.score_representation(zb, false);
          const double dl_dd = (a_wins ? -1.0 : 1.0) * sigmoid(a_wins ? -d : d);
          m.accumulate_gradient_pooled(za, w * dl_dd, grad);
          m.accumulate_gradient_pooled(zb, -w * dl_dd, grad);
        }
      }
      auto &p = m.params();
      for (std::size_t q = 0; q < n_params; ++q) {
        velocity[q] = cfg.momentum * velocity[q] -
                      cfg.learning_rate * (grad[q] + cfg.l2 * p[q]);
        p[q] += velocity[q];
      }
    }
    record(epoch);
    if (!valid.empty() && since_best >= cfg.patience) break;
  }
  result.model = best;
  return result;
}

struct EvalResult {
  double nll = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::size_t n = 0;
};

/// Scores both sides of every outcome and summarizes with the pairwise
/// metrics. Each outcome contributes (s_a - s_b, a_wins).
inline EvalResult evaluate_ranker(const ScoreModel &m,
                                  const std::vector<PairOutcome> &outcomes,
                                  FeatureStore &store) {
  if (outcomes.empty()) throw DomainError("evaluate_ranker: no test pairs");
  std::map<std::string, double> cache;
  auto score = [&](const std::string &id) {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    return cache[id] = m.score(store.frames(id));
  };
  std::vector<LabeledScorePair> items;
  items.reserve(outcomes.size());
  for (const auto &o : outcomes)
    items.push_back({score(o.utt_a) - score(o.utt_b), o.a_wins});
  EvalResult r;
  r.n = items.size();
  r.nll = mean_nll(items);
  r.accuracy = pairwise_accuracy(items);
  const auto pos = std::count_if(items.begin(), items.end(), [](auto &i) { return i.label; });
  // AUC is undefined on a single-class test set; report chance.
  r.auc = pos == 0 || pos == static_cast<long>(items.size()) ? 0.5 : roc_auc(items);
  return r;
}

/// Row laid out as NLL, Acc. (%), AUC (%).
inline std::string format_eval_row(const std::string &name, const EvalResult &r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %8s %9s %9s\n%-16s %8.4f %9.2f %9.2f\n",
                "Model", "NLL", "Acc.(%)", "AUC(%)", name.c_str(), r.nll,
                100.0 * r.accuracy, 100.0 * r.auc);
  return buf;
}

// ---------------------------------------------------------------------------
// Model file: "PSMD", u32 version, u32 aggregator, u32 input_dim,
// u32 hidden_dim, u32 layer count, u32 per layer, u64 parameter count, then
// f64 parameters, all little-endian.

inline constexpr char kModelMagic[4] = {'P', 'S', 'M', 'D'};
inline constexpr std::uint32_t kModelVersion = 1;

inline std::vector<char> encode_model(const ScoreModel &m) {
  std::vector<char> buf(kModelMagic, kModelMagic + 4);
  const auto &c = m.config();
  detail::put_u32(buf, kModelVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(c.aggregator));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.input_dim));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.hidden_dim));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.mlp_dims.size()));
  for (auto d : c.mlp_dims) detail::put_u32(buf, static_cast<std::uint32_t>(d));
  const std::uint64_t n = m.params().size();
  const char *pn = reinterpret_cast<const char *>(&n);
  buf.insert(buf.end(), pn, pn + 8);
  const char *pp = reinterpret_cast<const char *>(m.params().data());
  buf.insert(buf.end(), pp, pp + 8 * n);
  return buf;
}

inline ScoreModel decode_model(std::span<const char> bytes,
                               const std::string &what = "model") {
  std::size_t pos = 0;
  auto need = [&](std::size_t k) {
    if (pos + k > bytes.size()) throw IoError(what + ": truncated model file");
  };
  auto u32 = [&] {
    need(4);
    const auto v = detail::get_u32(bytes.data() + pos);
    pos += 4;
    return v;
  };
  need(4);
  if (std::memcmp(bytes.data(), kModelMagic, 4) != 0)
    throw IoError(what + ": not a model file");
  pos = 4;
  const auto version = u32();
  if (version != kModelVersion)
    throw IoError(what + ": unsupported model version " + std::to_string(version));
  ModelConfig c;
  const auto agg = u32();
  if (agg > 1) throw IoError(what + ": unknown aggregator code");
  c.aggregator = static_cast<Aggregator>(agg);
  c.input_dim = u32();
  c.hidden_dim = u32();
  const auto layers = u32();
  if (layers == 0 || layers > 64) throw IoError(what + ": bad layer count");
  c.mlp_dims.clear();
  for (std::uint32_t l = 0; l < layers; ++l) c.mlp_dims.push_back(u32());
  ScoreModel m;
  try {
    m = ScoreModel(c);
  } catch (const ConfigError &e) {
    throw IoError(what + ": " + e.what());
  }
  need(8);
  std::uint64_t n;
  std::memcpy(&n, bytes.data() + pos, 8);
  pos += 8;
  if (n != m.params().size())
    throw IoError(what + ": parameter count does not match dims");
  need(8 * n);
  if (pos + 8 * n != bytes.size()) throw IoError(what + ": trailing bytes");
  std::memcpy(m.params().data(), bytes.data() + pos, 8 * n);
  return m;
}

inline void save_model(const ScoreModel &m, const std::filesystem::path &path) {
  detail::write_file(path, encode_model(m));
}

inline ScoreModel load_model(const std::filesystem::path &path) {
  return decode_model(detail::read_file(path), path.string());
}

}  // namespace stylerank

#endif  // STYLERANK_RANKER_HPP_

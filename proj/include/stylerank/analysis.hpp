// stylerank/analysis.hpp

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

// Preference analyses over collected judgments: per-utterance win rates,
// source-vs-source win matrix, per-proxy pairwise concordance (PCR), and a
// no-intercept logistic model on proxy differences with stratified CV.

#ifndef STYLERANK_ANALYSIS_HPP_
#define STYLERANK_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stylerank/acoustics.hpp"
#include "stylerank/corpus.hpp"
#include "stylerank/error.hpp"
#include "stylerank/judgment.hpp"
#include "stylerank/metrics.hpp"
#include "stylerank/pairing.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

// ---------------------------------------------------------------------------
// Win rates

struct WinCount {
  std::size_t wins = 0;
  std::size_t appearances = 0;
  double rate() const {
    return static_cast<double>(wins) / static_cast<double>(appearances);
  }
};

/// Per-utterance wins / appearances. Utterances never judged are absent.
inline std::map<std::string, WinCount> empirical_win_rate(
    const std::vector<JudgmentRecord> &judgments,
    const std::vector<ComparisonPair> &pairs) {
  const PairIndex index(pairs);
  std::map<std::string, WinCount> out;
  for (const auto &j : judgments) {
    const auto &p = index.at(j.pair_id);
    auto &w = out[winner_of(p, j)];
    ++w.wins;
    ++w.appearances;
    ++out[loser_of(p, j)].appearances;
  }
  return out;
}

/// Cell (s1, s2): judgments between sources s1 != s2 won by the s1 side.
using WinMatrix = std::map<std::pair<std::string, std::string>, WinCount>;

inline WinMatrix corpus_win_matrix(const std::vector<JudgmentRecord> &judgments,
                                   const std::vector<ComparisonPair> &pairs,
                                   const std::vector<UtteranceRecord> &records) {
  const PairIndex index(pairs);
  std::map<std::string, std::string> source;
  for (const auto &r : records) source[r.id] = r.source;
  auto source_of = [&](const std::string &id) -> const std::string & {
    auto it = source.find(id);
    if (it == source.end())
      throw ValidationError("utterance '" + id + "' missing from manifest");
    return it->second;
  };
  WinMatrix m;
  for (const auto &j : judgments) {
    const auto &p = index.at(j.pair_id);
    const auto &sw = source_of(winner_of(p, j));
    const auto &sl = source_of(loser_of(p, j));
    if (sw == sl) continue;
    auto &won = m[{sw, sl}];
    ++won.wins;
    ++won.appearances;
    ++m[{sl, sw}].appearances;
  }
  return m;
}

inline std::string format_win_matrix(const WinMatrix &m) {
  std::set<std::string> sources;
  for (const auto &[key, _] : m) {
    sources.insert(key.first);
    sources.insert(key.second);
  }
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-16s", "winner \\ loser");
  os << buf;
  for (const auto &s : sources) {
    std::snprintf(buf, sizeof buf, " %14s", s.c_str());
    os << buf;
  }
  os << '\n';
  for (const auto &s1 : sources) {
    std::snprintf(buf, sizeof buf, "%-16s", s1.c_str());
    os << buf;
    for (const auto &s2 : sources) {
      auto it = m.find({s1, s2});
      if (it == m.end() || it->second.appearances == 0)
        std::snprintf(buf, sizeof buf, " %14s", "-");
      else
        std::snprintf(buf, sizeof buf, " %13.1f%%", 100.0 * it->second.rate());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

/// Histogram of per-utterance win rates by source, as CSV with columns
/// bin_lo, bin_hi, then one count column per source.
inline std::string win_rate_histogram_csv(
    const std::map<std::string, WinCount> &wins,
    const std::vector<UtteranceRecord> &records, std::size_t bins = 10) {
  if (bins == 0) throw DomainError("win_rate_histogram_csv: bins must be > 0");
  std::map<std::string, std::vector<std::size_t>> counts;
  for (const auto &r : records) counts.try_emplace(r.source, bins, 0);
  for (const auto &r : records) {
    auto it = wins.find(r.id);
    if (it == wins.end()) continue;
    const auto b = std::min(bins - 1, static_cast<std::size_t>(
                                          it->second.rate() * static_cast<double>(bins)));
    ++counts[r.source][b];
  }
  std::ostringstream os;
  os << "bin_lo,bin_hi";
  for (const auto &[s, _] : counts) os << ',' << s;
  os << '\n';
  for (std::size_t b = 0; b < bins; ++b) {
    os << static_cast<double>(b) / bins << ',' << static_cast<double>(b + 1) / bins;
    for (const auto &[_, c] : counts) os << ',' << c[b];
    os << '\n';
  }
  return os.str();
}

/// Proxy values of the top and bottom `fraction` of judged utterances by win
/// rate, as CSV (id, source, win_rate, group, then one column per proxy).
inline std::string quantile_split_csv(const std::map<std::string, WinCount> &wins,
                                      const std::vector<UtteranceRecord> &records,
                                      const ProxyTable &proxies,
                                      double fraction = 0.25) {
  std::vector<const UtteranceRecord *> judged;
  for (const auto &r : records)
    if (wins.count(r.id) && proxies.count(r.id)) judged.push_back(&r);
  std::stable_sort(judged.begin(), judged.end(), [&](auto *a, auto *b) {
    return wins.at(a->id).rate() > wins.at(b->id).rate();
  });
  const auto k = static_cast<std::size_t>(fraction * static_cast<double>(judged.size()));
  std::ostringstream os;
  os << "id,source,win_rate,group";
  for (const auto &info : kProxyInfo) os << ',' << info.key;
  os << '\n';
  auto emit = [&](const UtteranceRecord *r, const char *group) {
    os << r->id << ',' << r->source << ',' << wins.at(r->id).rate() << ',' << group;
    const auto &v = proxies.at(r->id);
    for (const auto &info : kProxyInfo) {
      os << ',';
      if (auto x = v.get(info.proxy)) os << *x;
    }
    os << '\n';
  };
  for (std::size_t i = 0; i < k; ++i) emit(judged[i], "top");
  for (std::size_t i = judged.size() - k; i < judged.size(); ++i)
    emit(judged[i], "bottom");
  return os.str();
}

// ---------------------------------------------------------------------------
// Pairwise concordance

enum class Direction { kHigher, kLower };

inline const char *direction_name(Direction d) {
  return d == Direction::kHigher ? "higher" : "lower";
}

struct PCRResult {
  std::string proxy_name;
  double pcr = 0.5;
  Direction direction = Direction::kHigher;
  std::size_t n_used = 0;
  ConfidenceInterval ci;
  double p_value = 1.0;
};

/// Concordance between preference and one proxy. Judgments where either side
/// lacks the proxy, or both sides are exactly equal, are not used.
inline PCRResult compute_pcr(const std::string &proxy_name, const ProxyTable &proxies,
                             const std::vector<JudgmentRecord> &judgments,
                             const std::vector<ComparisonPair> &pairs,
                             std::size_t b = 1000, std::uint64_t seed = 0) {
  const auto proxy = proxy_from_key(proxy_name);
  if (!proxy) throw LookupError("compute_pcr: unknown proxy '" + proxy_name + "'");
  const PairIndex index(pairs);
  auto value = [&](const std::string &id) -> std::optional<double> {
    auto it = proxies.find(id);
    if (it == proxies.end()) return std::nullopt;
    return it->second.get(*proxy);
  };
  std::vector<bool> concordant;
  for (const auto &j : judgments) {
    const auto &p = index.at(j.pair_id);
    const auto w = value(winner_of(p, j)), l = value(loser_of(p, j));
    if (!w || !l || *w == *l) continue;
    concordant.push_back(*w > *l);
  }
  if (concordant.empty())
    throw DomainError("compute_pcr: no usable judgments for '" + proxy_name + "'");

  const std::size_t n = concordant.size();
  const auto c = static_cast<std::size_t>(
      std::count(concordant.begin(), concordant.end(), true));
  PCRResult r;
  r.proxy_name = proxy_name;
  r.n_used = n;
  r.direction = 2 * c >= n ? Direction::kHigher : Direction::kLower;
  const std::size_t favorable = std::max(c, n - c);
  r.pcr = static_cast<double>(favorable) / static_cast<double>(n);
  if (r.direction == Direction::kLower) concordant.flip();
  r.ci = bootstrap_ci(concordant, b, 0.95, seed);
  r.p_value = binomial_pvalue(favorable, n, 0.5);
  return r;
}

/// PCR for every proxy, in table order.
inline std::vector<PCRResult> compute_all_pcr(const ProxyTable &proxies,
                                              const std::vector<JudgmentRecord> &judgments,
                                              const std::vector<ComparisonPair> &pairs,
                                              std::size_t b = 1000,
                                              std::uint64_t seed = 0) {
  std::vector<PCRResult> out;
  for (const auto &info : kProxyInfo)
    out.push_back(compute_pcr(info.key, proxies, judgments, pairs, b, seed));
  return out;
}

inline Json pcr_to_json(const PCRResult &r) {
  Json o;
  o["type"] = "pcr";
  o["proxy"] = r.proxy_name;
  o["pcr"] = r.pcr;
  o["direction"] = direction_name(r.direction);
  o["n_used"] = r.n_used;
  o["ci_lower"] = r.ci.lower;
  o["ci_upper"] = r.ci.upper;
  o["ci_level"] = r.ci.level;
  o["p_value"] = r.p_value;
  return o;
}

/// Text table: dimension, proxy, PCR (%) with an arrow for direction, CI, p, n.
inline std::string format_pcr_table(const std::vector<PCRResult> &rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %-24s %9s %17s %10s %7s\n", "Dimension",
                "Proxy", "PCR (%)", "95% CI", "p", "n");
  os << buf;
  for (const auto &r : rows) {
    const auto &info = proxy_info(*proxy_from_key(r.proxy_name));
    std::snprintf(buf, sizeof buf, "%-24s %-24s %7.1f %s [%5.1f, %5.1f] %10.2e %7zu\n",
                  info.dimension, info.label, 100.0 * r.pcr,
                  r.direction == Direction::kHigher ? "↑" : "↓",
                  100.0 * r.ci.lower, 100.0 * r.ci.upper, r.p_value, r.n_used);
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Difference dataset and logistic model

/// Rows of proxy(A) - proxy(B) with y = (choice == A), each followed by its
/// orientation mate (-x, !y). Rows of one judgment share a group id.
struct DiffDataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd x;  // rows x features
  std::vector<int> y;
  std::vector<std::size_t> group;
  std::size_t dropped = 0;  // judgments skipped for an absent proxy

  std::size_t rows() const { return y.size(); }
  std::size_t features() const { return static_cast<std::size_t>(x.cols()); }
};

inline DiffDataset build_diff_dataset(const std::vector<ComparisonPair> &pairs,
                                      const ProxyTable &proxies,
                                      const std::vector<JudgmentRecord> &judgments) {
  const PairIndex index(pairs);
  DiffDataset d;
  for (const auto &info : kProxyInfo) d.feature_names.emplace_back(info.key);
  std::vector<std::array<double, kNumProxies>> diffs;
  std::vector<int> outcome;
  for (const auto &j : judgments) {
    const auto &p = index.at(j.pair_id);
    auto ia = proxies.find(p.utt_a), ib = proxies.find(p.utt_b);
    if (ia == proxies.end() || ib == proxies.end() || !ia->second.complete() ||
        !ib->second.complete()) {
      ++d.dropped;
      continue;
    }
    std::array<double, kNumProxies> row;
    for (std::size_t k = 0; k < kNumProxies; ++k)
      row[k] = *ia->second.values[k] - *ib->second.values[k];
    diffs.push_back(row);
    outcome.push_back(j.choice == Slot::kA);
  }
  const auto n = diffs.size();
  d.x.resize(static_cast<Eigen::Index>(2 * n), kNumProxies);
  d.y.resize(2 * n);
  d.group.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kNumProxies; ++k) {
      d.x(2 * i, k) = diffs[i][k];
      d.x(2 * i + 1, k) = -diffs[i][k];
    }
    d.y[2 * i] = outcome[i];
    d.y[2 * i + 1] = 1 - outcome[i];
    d.group[2 * i] = d.group[2 * i + 1] = i;
  }
  return d;
}

/// Restricts a dataset to the named columns, in the given order.
inline DiffDataset select_features(const DiffDataset &d,
                                   const std::vector<std::string> &names) {
  if (names.empty()) throw DomainError("select_features: empty feature subset");
  DiffDataset out;
  out.feature_names = names;
  out.y = d.y;
  out.group = d.group;
  out.dropped = d.dropped;
  out.x.resize(d.x.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto it = std::find(d.feature_names.begin(), d.feature_names.end(), names[k]);
    if (it == d.feature_names.end())
      throw LookupError("select_features: unknown feature '" + names[k] + "'");
    out.x.col(static_cast<Eigen::Index>(k)) = d.x.col(it - d.feature_names.begin());
  }
  return out;
}

/// Feature keys of a proxy dimension, or all proxies for "All Combined".
inline std::vector<std::string> dimension_features(const std::string &dimension) {
  std::vector<std::string> out;
  for (const auto &info : kProxyInfo)
    if (dimension == "All Combined" || dimension == info.dimension)
      out.emplace_back(info.key);
  if (out.empty()) throw LookupError("unknown feature dimension '" + dimension + "'");
  return out;
}

/// Logistic model on difference features, without intercept. Features are
/// divided by their root-mean-square (their standard deviation on
/// orientation-augmented data) but not centred, so that the prediction for -x
/// is exactly the complement of the prediction for x.
struct LogisticModel {
  std::vector<std::string> feature_names;
  Eigen::VectorXd weights;  // on standardized features
  Eigen::VectorXd feature_stds;
  double l2 = 0.0;

  double logit(const Eigen::Ref<const Eigen::RowVectorXd> &x) const {
    return (x.array() / feature_stds.transpose().array()).matrix() * weights;
  }
  double probability(const Eigen::Ref<const Eigen::RowVectorXd> &x) const {
    return sigmoid(logit(x));
  }
};

/// Minimizes mean logistic loss + (l2 / 2) |w|^2 by Newton steps with
/// backtracking, until the gradient norm is at most `tol`.
inline LogisticModel fit_logistic(const DiffDataset &data, double l2 = 1e-4,
                                  int max_iter = 100, double tol = 1e-8) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto p = data.x.cols();
  if (n < 2) throw DomainError("fit_logistic: need at least 2 rows");
  const auto positives = std::count(data.y.begin(), data.y.end(), 1);
  if (positives == 0 || positives == n)
    throw DomainError("fit_logistic: both outcome classes must be present");
  if (!(l2 >= 0.0)) throw DomainError("fit_logistic: l2 must be >= 0");

  LogisticModel m;
  m.feature_names = data.feature_names;
  m.l2 = l2;
  m.feature_stds = (data.x.array().square().colwise().sum() / static_cast<double>(n))
                       .sqrt()
                       .transpose();
  for (Eigen::Index k = 0; k < p; ++k)
    if (!(m.feature_stds[k] > 0.0))
      throw DomainError("fit_logistic: feature '" + data.feature_names[k] +
                        "' is constant zero");
  const Eigen::MatrixXd z = data.x.array().rowwise() / m.feature_stds.transpose().array();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = data.y[static_cast<std::size_t>(i)];

  auto objective = [&](const Eigen::VectorXd &w) {
    const Eigen::VectorXd s = z * w;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      total -= log_sigmoid(y[i] > 0.5 ? s[i] : -s[i]);
    return total / static_cast<double>(n) + 0.5 * l2 * w.squaredNorm();
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double f = objective(w);
  double grad_norm = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd s = z * w;
    Eigen::VectorXd prob(n), curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = sigmoid(s[i]);
      curv[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad =
        z.transpose() * (prob - y) / static_cast<double>(n) + l2 * w;
    grad_norm = grad.norm();
    if (grad_norm <= tol) {
      m.weights = w;
      return m;
    }
    Eigen::MatrixXd hess = z.transpose() * curv.asDiagonal() * z / static_cast<double>(n);
    hess.diagonal().array() += l2 + 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    // Newton decrement: the predicted objective decrease of a full step.
    const double decrement = 0.5 * grad.dot(step);
    double t = 1.0;
    Eigen::VectorXd next = w - step;
    double f_next = objective(next);
    while (f_next > f - 1e-4 * t * grad.dot(step) && t > 1e-10) {
      t *= 0.5;
      next = w - t * step;
      f_next = objective(next);
    }
    if (!(f_next < f)) {
      // The line search stalls once the remaining decrease is below the
      // objective's rounding; that point is the optimum to working precision.
      if (decrement <= 1e-12 * std::max(1.0, f)) {
        m.weights = w;
        return m;
      }
      break;
    }
    w = next;
    f = f_next;
  }
  throw ConvergenceError("fit_logistic: no convergence", grad_norm);
}

struct FoldResult {
  double accuracy = 0.0;
  double auc = 0.0;
};

struct CVReport {
  std::string feature_set;
  std::vector<std::string> feature_names;
  std::vector<FoldResult> folds;
  double mean_acc = 0.0, std_acc = 0.0;
  double mean_auc = 0.0, std_auc = 0.0;
  std::vector<double> coefficients;  // standardized, from a fit on all rows
  std::size_t n_judgments = 0;
};

/// Fold of each judgment group: groups are split by their original outcome,
/// shuffled within each class and dealt to folds in turn.
inline std::vector<std::size_t> stratified_folds(const DiffDataset &data, std::size_t k,
                                                 std::uint64_t seed) {
  std::map<std::size_t, int> outcome;  // group -> y of its first row
  for (std::size_t i = 0; i < data.rows(); ++i) outcome.try_emplace(data.group[i], data.y[i]);
  std::vector<std::size_t> by_class[2];
  for (const auto &[g, y] : outcome) by_class[y].push_back(g);
  Rng rng(seed);
  std::map<std::size_t, std::size_t> fold_of;
  std::size_t deal = 0;
  for (auto &groups : by_class) {
    rng.shuffle(std::span<std::size_t>(groups));
    for (auto g : groups) fold_of[g] = deal++ % k;
  }
  std::vector<std::size_t> row_fold(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) row_fold[i] = fold_of[data.group[i]];
  return row_fold;
}

inline double sample_std(const std::vector<double> &v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// k-fold stratified cross-validation of fit_logistic on `feature_subset`
/// (all columns when empty). Orientation mates always share a fold.
inline CVReport cross_validate(const DiffDataset &full, std::size_t k,
                               const std::vector<std::string> &feature_subset,
                               std::uint64_t seed, double l2 = 1e-4) {
  if (k < 2) throw DomainError("cross_validate: k must be at least 2");
  const DiffDataset data =
      feature_subset.empty() ? full : select_features(full, feature_subset);
  const auto fold = stratified_folds(data, k, seed);
  CVReport report;
  report.feature_names = data.feature_names;
  report.n_judgments = data.rows() / 2;
  std::vector<double> accs, aucs;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < data.rows(); ++i)
      (fold[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    auto subset = [&](const std::vector<Eigen::Index> &rows) {
      DiffDataset s;
      s.feature_names = data.feature_names;
      s.x = data.x(rows, Eigen::all);
      for (auto r : rows) {
        s.y.push_back(data.y[static_cast<std::size_t>(r)]);
        s.group.push_back(data.group[static_cast<std::size_t>(r)]);
      }
      return s;
    };
    const auto tr = subset(train), te = subset(test);
    const auto pos = std::count(te.y.begin(), te.y.end(), 1);
    if (te.rows() == 0 || pos == 0 || pos == static_cast<long>(te.rows()))
      throw DomainError("cross_validate: fold " + std::to_string(f) +
                        " lacks one of the outcome classes");
    const auto model = fit_logistic(tr, l2);
    std::vector<LabeledScorePair> scored;
    for (std::size_t i = 0; i < te.rows(); ++i)
      scored.push_back({model.logit(te.x.row(static_cast<Eigen::Index>(i))), te.y[i] == 1});
    report.folds.push_back({pairwise_accuracy(scored), roc_auc(scored)});
    accs.push_back(report.folds.back().accuracy);
    aucs.push_back(report.folds.back().auc);
  }
  report.mean_acc = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(k);
  report.mean_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(k);
  report.std_acc = sample_std(accs);
  report.std_auc = sample_std(aucs);
  const auto final_model = fit_logistic(data, l2);
  report.coefficients.assign(final_model.weights.data(),
                             final_model.weights.data() + final_model.weights.size());
  return report;
}

inline Json cv_to_json(const CVReport &r) {
  Json o;
  o["type"] = "cv";
  o["feature_set"] = r.feature_set;
  o["n_features"] = r.feature_names.size();
  o["n_judgments"] = r.n_judgments;
  o["mean_acc"] = r.mean_acc;
  o["std_acc"] = r.std_acc;
  o["mean_auc"] = r.mean_auc;
  o["std_auc"] = r.std_auc;
  Json folds = Json::array();
  for (const auto &f : r.folds) folds.push_back({{"accuracy", f.accuracy}, {"auc", f.auc}});
  o["folds"] = folds;
  Json coef = Json::object();
  for (std::size_t i = 0; i < r.feature_names.size(); ++i)
    coef[r.feature_names[i]] = r.coefficients[i];
  o["coefficients"] = coef;
  return o;
}

/// Text table: feature set, feature count, accuracy and AUC as mean +- std (%).
inline std::string format_cv_table(const std::vector<CVReport> &rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %6s %14s %14s\n", "Feature set", "#Feat",
                "Acc (%)", "AUC (%)");
  os << buf;
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf, "%-24s %6zu %7.1f ± %4.1f %7.1f ± %4.1f\n",
                  r.feature_set.c_str(), r.feature_names.size(), 100.0 * r.mean_acc,
                  100.0 * r.std_acc, 100.0 * r.mean_auc, 100.0 * r.std_auc);
    os << buf;
  }
  return os.str();
}

inline std::string format_coefficients(const CVReport &r) {
  std::vector<std::size_t> order(r.feature_names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(r.coefficients[a]) > std::abs(r.coefficients[b]);
  });
  std::ostringstream os;
  char buf[128];
  for (auto i : order) {
    std::snprintf(buf, sizeof buf, "  %-26s %+8.3f\n", r.feature_names[i].c_str(),
                  r.coefficients[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace stylerank

#endif  // STYLERANK_ANALYSIS_HPP_

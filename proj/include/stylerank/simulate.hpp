// stylerank/simulate.hpp

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

// Bradley-Terry corpus generator. Each utterance gets a latent style value
// theta ~ N(0, latent_spread); its waveform parameters (F0, formant scale,
// pause ratio, articulation rate) and arousal score move linearly with theta,
// its frame embeddings are theta * u plus noise, and every judgment picks A
// with probability sigmoid(theta_A - theta_B).

#ifndef STYLERANK_SIMULATE_HPP_
#define STYLERANK_SIMULATE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stylerank/corpus.hpp"
#include "stylerank/embedding.hpp"
#include "stylerank/error.hpp"
#include "stylerank/judgment.hpp"
#include "stylerank/metrics.hpp"
#include "stylerank/pairing.hpp"
#include "stylerank/rng.hpp"
#include "stylerank/wav.hpp"

namespace stylerank {

struct SimulationConfig {
  std::size_t n_utterances = 200;
  std::size_t n_pairs = 2000;
  std::size_t n_judgments = 6000;
  double latent_spread = 1.5;
  std::uint64_t seed = 0;

  double train_fraction = 0.8;
  std::size_t frame_dims = 16;
  double frame_noise = 1.0;
  // Multiplies the per-utterance nuisance noise on every acoustic parameter.
  double acoustic_noise = 1.0;
  int sample_rate_hz = 16000;
  bool write_audio = true;
  std::size_t session_size = 25;
  PairingConfig pairing;

  void validate() const {
    if (n_utterances < 4) throw ConfigError("simulate: n_utterances must be >= 4");
    if (n_pairs == 0) throw ConfigError("simulate: n_pairs must be > 0");
    if (n_judgments == 0) throw ConfigError("simulate: n_judgments must be > 0");
    if (!(latent_spread >= 0.0) || std::isnan(latent_spread))
      throw ConfigError("simulate: latent_spread must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("simulate: train_fraction must be in (0, 1)");
    if (frame_dims == 0) throw ConfigError("simulate: frame_dims must be > 0");
    if (!(frame_noise >= 0.0) || !(acoustic_noise >= 0.0))
      throw ConfigError("simulate: noise levels must be >= 0");
    if (sample_rate_hz < 8000) throw ConfigError("simulate: sample_rate_hz must be >= 8000");
    if (session_size == 0) throw ConfigError("simulate: session_size must be > 0");
  }
};

/// Waveform parameters of one synthetic utterance.
struct VoiceParams {
  double duration_s = 3.0;
  double f0_hz = 180.0;
  double formant_scale = 1.0;
  double pause_ratio = 0.28;
  double articulation_rate = 5.0;  // syllables per second of phonation
};

struct SimulatedUtterance {
  UtteranceRecord record;
  double theta = 0.0;
  VoiceParams voice;
};

struct SimulationResult {
  std::vector<SimulatedUtterance> utterances;
  EmbeddingMatrix speaker_embeddings, text_embeddings;
  std::vector<ComparisonPair> pairs;
  std::vector<JudgmentRecord> judgments;
  std::size_t pair_shortfall = 0;

  std::map<std::string, double> theta() const {
    std::map<std::string, double> out;
    for (const auto &u : utterances) out[u.record.id] = u.theta;
    return out;
  }
  std::vector<UtteranceRecord> records() const {
    std::vector<UtteranceRecord> out;
    for (const auto &u : utterances) out.push_back(u.record);
    return out;
  }
};

/// Parameters for latent value `theta` with standard-normal nuisance draws
/// `noise` (4 values), scaled by `noise_scale`.
inline VoiceParams voice_params(double theta, double duration_s,
                                std::span<const double, 4> noise, double noise_scale) {
  VoiceParams v;
  v.duration_s = duration_s;
  v.f0_hz = std::clamp(180.0 - 20.0 * theta + 10.0 * noise_scale * noise[0], 90.0, 380.0);
  v.formant_scale =
      std::clamp(1.0 - 0.05 * theta + 0.02 * noise_scale * noise[1], 0.75, 1.25);
  v.pause_ratio = std::clamp(0.28 - 0.05 * theta + 0.02 * noise_scale * noise[2], 0.12, 0.5);
  v.articulation_rate =
      std::clamp(5.0 - 0.3 * theta + 0.2 * noise_scale * noise[3], 3.0, 7.0);
  return v;
}

/// Three voiced phrases separated by two equal pauses. Each phrase is a
/// glottal pulse train through F1-F3 resonators, amplitude-modulated into
/// syllables at the articulation rate. Peak amplitude 0.5.
inline Waveform synthesize_voice(const VoiceParams &v, int rate, Rng &rng) {
  constexpr double kPi = std::numbers::pi;
  const auto n = static_cast<std::size_t>(v.duration_s * rate);
  const double pause_s = 0.5 * v.pause_ratio * v.duration_s;
  const double phrase_s = (v.duration_s - 2.0 * pause_s) / 3.0;

  std::vector<double> source(n, 0.0), envelope(n, 0.0);
  for (int ph = 0; ph < 3; ++ph) {
    const double start = ph * (phrase_s + pause_s);
    const auto syllables = std::max(1.0, std::round(v.articulation_rate * phrase_s));
    const auto i0 = static_cast<std::size_t>(start * rate);
    const auto i1 = std::min(n, static_cast<std::size_t>((start + phrase_s) * rate));
    double next_pulse = static_cast<double>(i0);
    for (std::size_t i = i0; i < i1; ++i) {
      const double t = (static_cast<double>(i - i0) / rate) / phrase_s;  // 0..1 in phrase
      envelope[i] = 0.15 + 0.85 * 0.5 * (1.0 - std::cos(2.0 * kPi * syllables * t));
      if (static_cast<double>(i) >= next_pulse) {
        source[i] = 1.0;
        next_pulse += rate / (v.f0_hz * (1.0 + 0.005 * rng.normal()));
      }
    }
  }

  const double formants[3] = {600.0 * v.formant_scale, 1600.0 * v.formant_scale,
                              2600.0 * v.formant_scale};
  const double bandwidths[3] = {80.0, 100.0, 120.0};
  std::vector<double> x = source;
  for (int k = 0; k < 3; ++k) {
    const double r = std::exp(-kPi * bandwidths[k] / rate);
    const double w = 2.0 * kPi * formants[k] / rate;
    const double a1 = -2.0 * r * std::cos(w), a2 = r * r;
    const double gain = 1.0 + a1 + a2;
    double y1 = 0.0, y2 = 0.0;
    for (auto &s : x) {
      const double y = gain * s - a1 * y1 - a2 * y2;
      y2 = y1;
      y1 = y;
      s = y;
    }
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] *= envelope[i];
    peak = std::max(peak, std::abs(x[i]));
  }
  Waveform out;
  out.sample_rate_hz = rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] = (peak > 0.0 ? 0.5 * x[i] / peak : 0.0) + 1e-5 * rng.normal();
  return out;
}

namespace detail {

inline std::string sim_timestamp(std::size_t k) {
  const std::time_t t = 1767225600 + static_cast<std::time_t>(k);  // 2026-01-01
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string numbered(const char *prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

}  // namespace detail

/// Generates the corpus in memory. Stages draw from independent streams so,
/// for example, the judgments do not change when write_audio is toggled.
inline SimulationResult simulate(const SimulationConfig &cfg) {
  cfg.validate();
  SimulationResult res;
  const std::size_t n = cfg.n_utterances;

  Rng latent(Rng::derived(cfg.seed, 1));
  Rng meta(Rng::derived(cfg.seed, 2));
  Rng emb(Rng::derived(cfg.seed, 3));

  const std::size_t n_speakers = std::max<std::size_t>(2, n / 4);
  constexpr std::size_t kEmbDims = 32;
  res.speaker_embeddings = EmbeddingMatrix(n_speakers, kEmbDims);
  // Embedding values are held at float precision, as stored on disk, so the
  // in-memory pairs equal those rebuilt from the written files.
  for (std::size_t s = 0; s < n_speakers; ++s)
    for (auto &v : res.speaker_embeddings.row(s)) v = static_cast<float>(emb.normal());
  res.text_embeddings = EmbeddingMatrix(n, kEmbDims);
  for (std::size_t i = 0; i < n; ++i)
    for (auto &v : res.text_embeddings.row(i))
      v = static_cast<float>(1.0 / std::sqrt(double(kEmbDims)) + 0.15 * emb.normal());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  meta.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * double(n)));
  std::vector<Split> split(n);
  for (std::size_t k = 0; k < n; ++k)
    split[order[k]] = k < n_train ? Split::kTrain : Split::kTest;

  for (std::size_t i = 0; i < n; ++i) {
    SimulatedUtterance u;
    u.theta = latent.normal(0.0, cfg.latent_spread);
    const double noise[4] = {latent.normal(), latent.normal(), latent.normal(), latent.normal()};
    const double duration = meta.uniform(2.8, 3.2);
    u.voice = voice_params(u.theta, duration, std::span<const double, 4>(noise), cfg.acoustic_noise);

    auto &r = u.record;
    r.id = detail::numbered("sim", i);
    r.source = meta.bernoulli(0.5) ? "anime" : "reading";
    r.split = split[i];
    r.audio_path = "audio/" + r.id + ".wav";
    r.duration_s = static_cast<double>(static_cast<std::size_t>(duration * cfg.sample_rate_hz)) /
                   cfg.sample_rate_hz;
    u.voice.duration_s = r.duration_s;
    r.transcript = "synthetic utterance " + std::to_string(i);
    r.script_likeness = 1 + static_cast<int>(meta.index(2));
    r.cer = meta.uniform(0.0, 0.1);
    r.predicted_mos = meta.uniform(3.2, 4.5);
    r.arousal = std::clamp(0.5 + 0.08 * u.theta + 0.04 * cfg.acoustic_noise * meta.normal(),
                           0.0, 1.0);
    r.speaker_embedding_ref = static_cast<std::uint32_t>(meta.index(n_speakers));
    r.text_embedding_ref = static_cast<std::uint32_t>(i);
    res.utterances.push_back(std::move(u));
  }

  // Pairs are built per split with the regular pairing stage.
  const auto train_quota =
      static_cast<std::size_t>(std::llround(cfg.train_fraction * double(cfg.n_pairs)));
  for (Split s : {Split::kTrain, Split::kTest}) {
    std::vector<UtteranceRecord> pool;
    for (const auto &u : res.utterances)
      if (u.record.split == s) pool.push_back(u.record);
    PairingConfig pc = cfg.pairing;
    pc.quota = s == Split::kTrain ? train_quota : cfg.n_pairs - train_quota;
    if (pc.quota == 0 || pool.size() < 2) continue;
    auto built = build_pairs(pool, res.text_embeddings, res.speaker_embeddings, pc);
    res.pair_shortfall += built.shortfall;
    res.pairs.insert(res.pairs.end(), built.pairs.begin(), built.pairs.end());
  }
  if (res.pairs.empty()) throw DomainError("simulate: no pairs could be formed");

  // Judgments cycle through a seeded pair order so per-pair counts differ by
  // at most one.
  Rng judge(Rng::derived(cfg.seed, 4));
  std::map<std::string, double> theta;
  for (const auto &u : res.utterances) theta[u.record.id] = u.theta;
  std::vector<std::size_t> pair_order(res.pairs.size());
  std::iota(pair_order.begin(), pair_order.end(), std::size_t{0});
  judge.shuffle(std::span<std::size_t>(pair_order));
  for (std::size_t k = 0; k < cfg.n_judgments; ++k) {
    const auto &p = res.pairs[pair_order[k % pair_order.size()]];
    const std::size_t session = k / cfg.session_size;
    JudgmentRecord j;
    j.pair_id = p.pair_id;
    j.session_id = detail::numbered("sim-s", session);
    j.rater_id = detail::numbered("sim-r", session / 10);
    j.presented_left = judge.bernoulli(0.5) ? Slot::kA : Slot::kB;
    const double q = sigmoid(theta.at(p.utt_a) - theta.at(p.utt_b));
    j.choice = judge.bernoulli(q) ? Slot::kA : Slot::kB;
    j.side_chosen = j.choice == j.presented_left ? Side::kLeft : Side::kRight;
    j.timestamp = detail::sim_timestamp(k);
    res.judgments.push_back(std::move(j));
  }
  return res;
}

/// Frame embeddings of one utterance: rows are theta * u + speaker offset +
/// N(0, frame_noise), about ten frames per second.
inline EmbeddingMatrix frame_embeddings(const SimulationConfig &cfg, const SimulationResult &res,
                                        std::size_t index) {
  Rng dir(Rng::derived(cfg.seed, 5));
  std::vector<double> u(cfg.frame_dims);
  double norm = 0.0;
  for (auto &v : u) {
    v = dir.normal();
    norm += v * v;
  }
  for (auto &v : u) v /= std::sqrt(norm);

  const auto &utt = res.utterances.at(index);
  Rng spk(Rng::derived(cfg.seed ^ 0x5bd1e995ULL, utt.record.speaker_embedding_ref));
  std::vector<double> offset(cfg.frame_dims);
  for (auto &v : offset) v = 0.5 * spk.normal();

  Rng rng(Rng::derived(cfg.seed, 1000 + index));
  const auto frames = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::lround(utt.record.duration_s * 10.0)));
  EmbeddingMatrix m(frames, cfg.frame_dims);
  for (std::size_t t = 0; t < frames; ++t) {
    auto row = m.row(t);
    for (std::size_t d = 0; d < cfg.frame_dims; ++d)
      row[d] = static_cast<float>(utt.theta * u[d] + offset[d] + cfg.frame_noise * rng.normal());
  }
  return m;
}

inline Waveform utterance_waveform(const SimulationConfig &cfg, const SimulationResult &res,
                                   std::size_t index) {
  Rng rng(Rng::derived(cfg.seed, 100000 + index));
  return synthesize_voice(res.utterances.at(index).voice, cfg.sample_rate_hz, rng);
}

/// Writes manifest.jsonl, speaker.emb, text.emb, pairs.jsonl,
/// judgments.jsonl, theta.jsonl, frames/<id>.fse and (optionally)
/// audio/<id>.wav under `out_dir`.
inline void write_simulation(const SimulationConfig &cfg, const SimulationResult &res,
                             const std::filesystem::path &out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "frames");
  if (cfg.write_audio) fs::create_directories(out_dir / "audio");
  save_manifest(out_dir / "manifest.jsonl", res.records());
  save_embedding(out_dir / "speaker.emb", res.speaker_embeddings);
  save_embedding(out_dir / "text.emb", res.text_embeddings);
  save_pairs(out_dir / "pairs.jsonl", res.pairs);
  save_judgments(out_dir / "judgments.jsonl", res.judgments);
  std::vector<Json> theta;
  for (const auto &u : res.utterances) {
    Json o;
    o["id"] = u.record.id;
    o["theta"] = u.theta;
    theta.push_back(o);
  }
  write_lines(out_dir / "theta.jsonl", theta);
  for (std::size_t i = 0; i < res.utterances.size(); ++i) {
    const auto &id = res.utterances[i].record.id;
    save_embedding(out_dir / "frames" / (id + ".fse"), frame_embeddings(cfg, res, i));
    if (cfg.write_audio) save_wav(out_dir / "audio" / (id + ".wav"), utterance_waveform(cfg, res, i));
  }
}

inline std::map<std::string, double> load_theta(const std::filesystem::path &path) {
  std::map<std::string, double> out;
  for (const auto &line : read_lines(path)) out[get_string(line, "id")] = get_number(line, "theta");
  return out;
}

/// Expected accuracy of the Bayes rule (predict A iff theta_A > theta_B) over
/// judgments whose latent differences are `diffs`.
inline double bayes_accuracy(std::span<const double> diffs) {
  if (diffs.empty()) throw DomainError("bayes_accuracy: no judgments");
  double sum = 0.0;
  for (double d : diffs) {
    const double q = sigmoid(d);
    sum += std::max(q, 1.0 - q);
  }
  return sum / static_cast<double>(diffs.size());
}

/// Expected AUC of the Bayes score on orientation-augmented rows: each
/// judgment with latent difference d yields (d, y) and (-d, 1 - y), with
/// P(y = 1) = sigmoid(d). Returns E[concordant positive/negative pairs] /
/// E[positive/negative pairs], ties counted one half; mates are handled
/// exactly since their labels are complementary.
inline double bayes_auc(std::span<const double> diffs) {
  if (diffs.empty()) throw DomainError("bayes_auc: no judgments");
  struct Row {
    double d, q;
  };
  std::vector<Row> rows;
  rows.reserve(2 * diffs.size());
  for (double d : diffs) {
    const double q = sigmoid(d);
    rows.push_back({d, q});
    rows.push_back({-d, 1.0 - q});
  }
  std::sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) { return a.d < b.d; });

  // Independent-label sums over ordered pairs (i positive, j negative), i != j.
  double num = 0.0, total_q = 0.0, total_neg = 0.0, below_neg = 0.0;
  for (const auto &r : rows) {
    total_q += r.q;
    total_neg += 1.0 - r.q;
  }
  double den = 0.0;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double group_q = 0.0, group_neg = 0.0, group_cross = 0.0;
    while (j < rows.size() && rows[j].d == rows[i].d) {
      group_q += rows[j].q;
      group_neg += 1.0 - rows[j].q;
      group_cross += rows[j].q * (1.0 - rows[j].q);
      ++j;
    }
    num += group_q * below_neg + 0.5 * (group_q * group_neg - group_cross);
    below_neg += group_neg;
    i = j;
  }
  for (const auto &r : rows) den += r.q * (total_neg - (1.0 - r.q));

  // Mate correction: P(row pos, mate neg) = q rather than q * q.
  for (double d : diffs) {
    const double q = sigmoid(d);
    const double extra_fwd = q - q * q;                      // (d, q) pos, (-d, 1-q) neg
    const double extra_rev = (1.0 - q) - (1.0 - q) * (1.0 - q);  // (-d) pos, (d) neg
    const double fwd = d > -d ? 1.0 : (d == -d ? 0.5 : 0.0);
    num += extra_fwd * fwd + extra_rev * (1.0 - fwd);
    den += extra_fwd + extra_rev;
  }
  return den > 0.0 ? num / den : 0.5;
}

}  // namespace stylerank

#endif  // STYLERANK_SIMULATE_HPP_

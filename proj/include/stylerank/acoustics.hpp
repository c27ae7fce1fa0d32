// stylerank/acoustics.hpp

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

// Acoustic proxies of speaking style, computed per utterance:
//
//   timbre        F1/F2/F3 medians (Burg LPC on voiced frames)
//   prosody       mean F0, voicing ratio, mean spectral flux
//   articulation  syllable rate, articulation rate, pause ratio, mean pause
//
// plus arousal, which is read from the manifest. Every level threshold is
// relative to the utterance's own peak, and spectra are L1-normalized, so the
// proxies do not depend on recording gain.

#ifndef STYLERANK_ACOUSTICS_HPP_
#define STYLERANK_ACOUSTICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stylerank/corpus.hpp"
#include "stylerank/dsp.hpp"
#include "stylerank/error.hpp"
#include "stylerank/lineformat.hpp"
#include "stylerank/wav.hpp"

namespace stylerank {

struct AcousticsConfig {
  // Pitch tracking.
  double f0_window_s = 0.040;
  double f0_hop_s = 0.010;
  double f0_min_hz = 60.0;
  double f0_max_hz = 500.0;
  double voicing_threshold = 0.45;
  double voicing_floor_db = 30.0;
  // Among NCCF peaks at least this fraction of the best, take the shortest
  // lag; guards against picking a multiple of the true period.
  double octave_ratio = 0.9;

  // Spectral flux.
  double flux_window_s = 0.025;
  double flux_hop_s = 0.010;

  // Formants.
  int formant_rate_hz = 10000;
  double preemphasis = 0.97;
  double formant_window_s = 0.025;
  int lpc_order = 12;
  double max_bandwidth_hz = 400.0;
  double min_formant_hz = 90.0;
  double max_formant_hz = 4500.0;
  std::size_t min_voiced_frames = 5;

  // Pauses.
  double pause_window_s = 0.025;
  double pause_hop_s = 0.010;
  double silence_db = 35.0;
  double min_pause_s = 0.150;

  // Syllable nuclei.
  double envelope_cutoff_hz = 10.0;
  double prominence_db = 2.0;
  double min_nucleus_separation_s = 0.060;
};

struct F0Track {
  double hop_s = 0.0;
  double window_s = 0.0;
  std::vector<double> f0_hz;  // 0 where unvoiced
  std::vector<bool> voiced;
  std::vector<double> periodicity;

  std::size_t size() const { return f0_hz.size(); }
  double frame_center_s(std::size_t i) const {
    return i * hop_s + 0.5 * window_s;
  }
};

struct PauseSegmentation {
  std::vector<std::pair<double, double>> pauses;
  double total_s = 0.0;
  double phonation_s = 0.0;

  double pause_ratio() const {
    return total_s > 0.0 ? (total_s - phonation_s) / total_s : 0.0;
  }
  double mean_pause_s() const {
    if (pauses.empty()) return 0.0;
    double sum = 0.0;
    for (const auto &[a, b] : pauses) sum += b - a;
    return sum / static_cast<double>(pauses.size());
  }
  bool in_pause(double t) const {
    for (const auto &[a, b] : pauses)
      if (t >= a && t <= b) return true;
    return false;
  }
};

namespace detail {

inline std::size_t samples_for(double seconds, int rate) {
  return static_cast<std::size_t>(std::lround(seconds * rate));
}

inline void require_duration(const Waveform &w, double seconds,
                             const char *op) {
  if (w.sample_rate_hz < 8000)
    throw DomainError(std::string(op) + ": sample rate must be >= 8000 Hz");
  if (w.duration_s() + 1e-12 < seconds)
    throw DomainError(std::string(op) + ": input shorter than " +
                      std::to_string(seconds) + " s");
}

inline std::vector<double> frame_rms(std::span<const double> x,
                                     std::size_t win, std::size_t hop) {
  const std::size_t frames = dsp::frame_count(x.size(), win, hop);
  std::vector<double> rms(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < win; ++j) s += x[i * hop + j] * x[i * hop + j];
    rms[i] = std::sqrt(s / static_cast<double>(win));
  }
  return rms;
}

inline double db_to_ratio(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace detail

/// Normalized cross-correlation pitch tracker.
inline F0Track estimate_f0(const Waveform &w, const AcousticsConfig &cfg = {}) {
  detail::require_duration(w, 0.1, "estimate_f0");
  const int sr = w.sample_rate_hz;
  const std::size_t win = detail::samples_for(cfg.f0_window_s, sr);
  const std::size_t hop = detail::samples_for(cfg.f0_hop_s, sr);
  const std::size_t frames = dsp::frame_count(w.samples.size(), win, hop);
  const std::size_t min_lag =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sr / cfg.f0_max_hz)));
  const std::size_t max_lag =
      std::min(win - 2, static_cast<std::size_t>(std::ceil(sr / cfg.f0_min_hz)));

  F0Track track;
  track.hop_s = static_cast<double>(hop) / sr;
  track.window_s = static_cast<double>(win) / sr;
  track.f0_hz.assign(frames, 0.0);
  track.voiced.assign(frames, false);
  track.periodicity.assign(frames, 0.0);

  const auto rms = detail::frame_rms(w.samples, win, hop);
  const double peak_rms = rms.empty() ? 0.0 : *std::max_element(rms.begin(), rms.end());
  if (peak_rms <= 0.0) return track;
  const double floor_rms = peak_rms / detail::db_to_ratio(cfg.voicing_floor_db);

  dsp::RealFft fft(dsp::next_pow2(2 * win));
  std::vector<double> x(win), energy(win + 1), acf, nccf(max_lag + 2, 0.0);
  std::vector<std::complex<double>> spec;
  for (std::size_t f = 0; f < frames; ++f) {
    const double *src = w.samples.data() + f * hop;
    double mean = 0.0;
    for (std::size_t j = 0; j < win; ++j) mean += src[j];
    mean /= static_cast<double>(win);
    energy[0] = 0.0;
    for (std::size_t j = 0; j < win; ++j) {
      x[j] = src[j] - mean;
      energy[j + 1] = energy[j] + x[j] * x[j];
    }
    if (energy[win] <= 0.0) continue;
    fft.forward(x, spec);
    for (auto &c : spec) c = std::norm(c);
    fft.inverse(spec, acf);
    const double scale = 1.0 / static_cast<double>(fft.size());

    for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
      const double e0 = energy[win - lag];               // x[0 .. win-lag)
      const double e1 = energy[win] - energy[lag];       // x[lag .. win)
      nccf[lag] = e0 > 0.0 && e1 > 0.0 ? acf[lag] * scale / std::sqrt(e0 * e1) : 0.0;
    }
    double best = 0.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag)
      if (nccf[lag] >= nccf[lag - 1] && nccf[lag] >= nccf[lag + 1])
        best = std::max(best, nccf[lag]);
    if (best <= 0.0) continue;
    std::size_t pick = 0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag)
      if (nccf[lag] >= nccf[lag - 1] && nccf[lag] >= nccf[lag + 1] &&
          nccf[lag] >= cfg.octave_ratio * best) {
        pick = lag;
        break;
      }
    const double ym = nccf[pick - 1], y0 = nccf[pick], yp = nccf[pick + 1];
    const double curvature = ym - 2.0 * y0 + yp;
    const double delta = curvature < 0.0 ? 0.5 * (ym - yp) / curvature : 0.0;
    const double period = pick + delta;
    const double value = std::clamp(y0 - 0.25 * (ym - yp) * delta, 0.0, 1.0);
    const double f0 = sr / period;
    track.periodicity[f] = value;
    if (value >= cfg.voicing_threshold && rms[f] >= floor_rms &&
        f0 >= cfg.f0_min_hz && f0 <= cfg.f0_max_hz) {
      track.voiced[f] = true;
      track.f0_hz[f] = f0;
    }
  }
  return track;
}

inline double voicing_ratio(const F0Track &t) {
  if (t.size() == 0) throw DomainError("voicing_ratio: empty track");
  const auto n = std::count(t.voiced.begin(), t.voiced.end(), true);
  return static_cast<double>(n) / static_cast<double>(t.size());
}

inline std::optional<double> mean_f0(const F0Track &t) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.voiced[i]) {
      sum += t.f0_hz[i];
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// Mean half-wave-rectified L2 flux between consecutive L1-normalized
/// magnitude spectra.
inline double spectral_flux_mean(const Waveform &w,
                                 const AcousticsConfig &cfg = {}) {
  const int sr = w.sample_rate_hz;
  if (sr < 8000) throw DomainError("spectral_flux_mean: sample rate must be >= 8000 Hz");
  const std::size_t win = detail::samples_for(cfg.flux_window_s, sr);
  const std::size_t hop = detail::samples_for(cfg.flux_hop_s, sr);
  const std::size_t frames = dsp::frame_count(w.samples.size(), win, hop);
  if (frames < 2) throw DomainError("spectral_flux_mean: need at least 2 frames");

  const auto window = dsp::hann_window(win);
  dsp::RealFft fft(dsp::next_pow2(win));
  std::vector<double> x(win), prev(fft.bins(), 0.0), cur(fft.bins());
  std::vector<std::complex<double>> spec;
  double total = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t j = 0; j < win; ++j) x[j] = w.samples[f * hop + j] * window[j];
    fft.forward(x, spec);
    double l1 = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      cur[k] = std::abs(spec[k]);
      l1 += cur[k];
    }
    if (l1 > 0.0)
      for (double &v : cur) v /= l1;
    if (f > 0) {
      double s = 0.0;
      for (std::size_t k = 0; k < cur.size(); ++k) {
        const double d = cur[k] - prev[k];
        if (d > 0.0) s += d * d;
      }
      total += std::sqrt(s);
    }
    std::swap(prev, cur);
  }
  return total / static_cast<double>(frames - 1);
}

struct FormantMedians {
  double f1, f2, f3;
};

/// F1..F3 medians over voiced frames, or nullopt when too few voiced frames
/// yield three formant candidates.
inline std::optional<FormantMedians> estimate_formants(
    const Waveform &w, const F0Track &track, const AcousticsConfig &cfg = {}) {
  const auto voiced = std::count(track.voiced.begin(), track.voiced.end(), true);
  if (static_cast<std::size_t>(voiced) < cfg.min_voiced_frames) return std::nullopt;

  const int rate = cfg.formant_rate_hz;
  auto x = dsp::resample(w.samples, w.sample_rate_hz, rate);
  for (std::size_t i = x.size(); i-- > 1;) x[i] -= cfg.preemphasis * x[i - 1];

  const std::size_t win = detail::samples_for(cfg.formant_window_s, rate);
  const auto window = dsp::hamming_window(win);
  std::vector<double> f1s, f2s, f3s, frame(win);
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!track.voiced[i]) continue;
    const long center = std::lround(track.frame_center_s(i) * rate);
    const long start = center - static_cast<long>(win / 2);
    if (start < 0 || start + static_cast<long>(win) > static_cast<long>(x.size()))
      continue;
    for (std::size_t j = 0; j < win; ++j) frame[j] = x[start + j] * window[j];
    const auto a = dsp::burg_lpc(frame, cfg.lpc_order);
    if (a.empty()) continue;
    std::vector<double> freqs;
    for (const auto &z : dsp::polynomial_roots(a)) {
      if (z.imag() <= 0.0) continue;
      const double freq = std::arg(z) * rate / (2.0 * std::numbers::pi);
      const double bw = -std::log(std::abs(z)) * rate / std::numbers::pi;
      if (bw < cfg.max_bandwidth_hz && freq >= cfg.min_formant_hz &&
          freq <= cfg.max_formant_hz)
        freqs.push_back(freq);
    }
    if (freqs.size() < 3) continue;
    std::sort(freqs.begin(), freqs.end());
    f1s.push_back(freqs[0]);
    f2s.push_back(freqs[1]);
    f3s.push_back(freqs[2]);
  }
  if (f1s.empty()) return std::nullopt;
  return FormantMedians{dsp::median(f1s), dsp::median(f2s), dsp::median(f3s)};
}

/// Pauses are maximal runs of frames quieter than (peak RMS - silence_db),
/// spanning the union of their analysis windows, at least min_pause_s long.
/// Leading and trailing silences count.
inline PauseSegmentation segment_pauses(const Waveform &w,
                                        const AcousticsConfig &cfg = {}) {
  detail::require_duration(w, 0.3, "segment_pauses");
  const int sr = w.sample_rate_hz;
  const std::size_t win = detail::samples_for(cfg.pause_window_s, sr);
  const std::size_t hop = detail::samples_for(cfg.pause_hop_s, sr);
  const auto rms = detail::frame_rms(w.samples, win, hop);
  const double peak = rms.empty() ? 0.0 : *std::max_element(rms.begin(), rms.end());
  const double threshold = peak / detail::db_to_ratio(cfg.silence_db);

  PauseSegmentation seg;
  seg.total_s = w.duration_s();
  std::vector<std::pair<double, double>> runs;
  for (std::size_t i = 0; i < rms.size();) {
    const bool silent = peak <= 0.0 || rms[i] < threshold;
    if (!silent) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < rms.size() && (peak <= 0.0 || rms[j + 1] < threshold)) ++j;
    double start = static_cast<double>(i * hop) / sr;
    double end = static_cast<double>(j * hop + win) / sr;
    if (i == 0) start = 0.0;
    if (j + 1 == rms.size()) end = seg.total_s;
    runs.emplace_back(start, end);
    i = j + 1;
  }
  // Neighbouring runs separated by a single loud frame can overlap.
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].first < runs[k - 1].second) {
      const double mid = 0.5 * (runs[k].first + runs[k - 1].second);
      runs[k - 1].second = mid;
      runs[k].first = mid;
    }
  double paused = 0.0;
  for (const auto &r : runs)
    if (r.second - r.first >= cfg.min_pause_s - 1e-9) {
      seg.pauses.push_back(r);
      paused += r.second - r.first;
    }
  seg.phonation_s = std::clamp(seg.total_s - paused, 0.0, seg.total_s);
  return seg;
}

struct SpeechRates {
  double syllable_rate = 0.0;      // nuclei per second of total time
  double articulation_rate = 0.0;  // nuclei per second of phonation
  std::size_t nuclei = 0;
};

/// Syllable nuclei are prominent peaks of the low-passed intensity envelope
/// outside pauses.
inline SpeechRates syllable_nuclei(const Waveform &w,
                                   const PauseSegmentation &seg,
                                   const AcousticsConfig &cfg = {}) {
  detail::require_duration(w, 0.3, "syllable_nuclei");
  if (seg.phonation_s <= 0.0) return {};
  const int sr = w.sample_rate_hz;
  const std::size_t block = detail::samples_for(0.01, sr);
  const double env_rate = static_cast<double>(sr) / block;
  const std::size_t blocks = w.samples.size() / block;
  std::vector<double> power(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t j = 0; j < block; ++j) {
      const double v = w.samples[b * block + j];
      s += v * v;
    }
    power[b] = s / static_cast<double>(block);
  }
  const auto lp = dsp::Biquad::butterworth_lowpass(cfg.envelope_cutoff_hz, env_rate);
  auto env = dsp::filtfilt(lp, power, 12);
  double peak = 0.0;
  for (double &v : env) {
    v = std::max(v, 0.0);
    peak = std::max(peak, v);
  }
  if (peak <= 0.0) return {};
  std::vector<double> db(env.size());
  for (std::size_t i = 0; i < env.size(); ++i)
    db[i] = 10.0 * std::log10(env[i] / peak + 1e-12);

  struct Peak {
    std::size_t index;
    double level;
  };
  std::vector<Peak> peaks;
  const std::size_t n = db.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(db[i] > db[i - 1] && db[i] >= db[i + 1])) continue;
    // Prominence: height above the higher of the two bases, each base being
    // the minimum between the peak and the nearest higher sample (or edge).
    double left_min = db[i];
    for (std::size_t k = i; k-- > 0;) {
      if (db[k] > db[i]) break;
      left_min = std::min(left_min, db[k]);
    }
    double right_min = db[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      if (db[k] > db[i]) break;
      right_min = std::min(right_min, db[k]);
    }
    if (db[i] - std::max(left_min, right_min) < cfg.prominence_db) continue;
    const double t = (static_cast<double>(i) + 0.5) / env_rate;
    if (seg.in_pause(t)) continue;
    peaks.push_back({i, db[i]});
  }
  // Enforce the minimum separation, keeping the louder peak.
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak &a, const Peak &b) { return a.level > b.level; });
  const double min_sep = cfg.min_nucleus_separation_s * env_rate;
  std::vector<std::size_t> kept;
  for (const auto &p : peaks) {
    bool clash = false;
    for (std::size_t k : kept)
      if (std::abs(static_cast<double>(k) - static_cast<double>(p.index)) < min_sep) {
        clash = true;
        break;
      }
    if (!clash) kept.push_back(p.index);
  }
  SpeechRates rates;
  rates.nuclei = kept.size();
  rates.syllable_rate = kept.size() / seg.total_s;
  rates.articulation_rate = kept.size() / seg.phonation_s;
  return rates;
}

// The eleven proxies, in report order.
enum class Proxy : int {
  kArousal = 0,
  kF1Median,
  kF2Median,
  kF3Median,
  kMeanF0,
  kVoicingRatio,
  kSpectralFlux,
  kSyllableRate,
  kArticulationRate,
  kPauseRatio,
  kMeanPause,
};

inline constexpr std::size_t kNumProxies = 11;

struct ProxyInfo {
  Proxy proxy;
  const char *key;
  const char *label;
  const char *dimension;
};

inline constexpr std::array<ProxyInfo, kNumProxies> kProxyInfo{{
    {Proxy::kArousal, "arousal", "Intensity (Arousal)", "Emotional Explicitness"},
    {Proxy::kF1Median, "f1_median_hz", "F1 median (Hz)", "Timbre Difference"},
    {Proxy::kF2Median, "f2_median_hz", "F2 median (Hz)", "Timbre Difference"},
    {Proxy::kF3Median, "f3_median_hz", "F3 median (Hz)", "Timbre Difference"},
    {Proxy::kMeanF0, "mean_f0_hz", "Mean F0 (Hz)", "Prosodic Salience"},
    {Proxy::kVoicingRatio, "voicing_ratio", "Voicing ratio", "Prosodic Salience"},
    {Proxy::kSpectralFlux, "spectral_flux_mean", "Spectral flux (mean)", "Prosodic Salience"},
    {Proxy::kSyllableRate, "syllable_rate_per_s", "Syllable rate", "Articulation Clarity"},
    {Proxy::kArticulationRate, "articulation_rate_per_s", "Articulation rate", "Articulation Clarity"},
    {Proxy::kPauseRatio, "pause_ratio", "Pause ratio", "Articulation Clarity"},
    {Proxy::kMeanPause, "mean_pause_s", "Mean pause length", "Articulation Clarity"},
}};

inline const ProxyInfo &proxy_info(Proxy p) {
  return kProxyInfo[static_cast<std::size_t>(p)];
}

inline std::optional<Proxy> proxy_from_key(const std::string &key) {
  for (const auto &info : kProxyInfo)
    if (key == info.key) return info.proxy;
  return std::nullopt;
}

/// Proxies belonging to one perceptual dimension, in report order.
inline std::vector<Proxy> proxies_in_dimension(const std::string &dimension) {
  std::vector<Proxy> out;
  for (const auto &info : kProxyInfo)
    if (dimension == info.dimension) out.push_back(info.proxy);
  return out;
}

inline std::vector<std::string> proxy_dimensions() {
  std::vector<std::string> out;
  for (const auto &info : kProxyInfo)
    if (std::find(out.begin(), out.end(), info.dimension) == out.end())
      out.emplace_back(info.dimension);
  return out;
}

/// The eleven proxies of one utterance. Formant medians (and mean F0, when no
/// frame is voiced) may be absent.
struct ProxyVector {
  std::array<std::optional<double>, kNumProxies> values;

  std::optional<double> get(Proxy p) const {
    return values[static_cast<std::size_t>(p)];
  }
  void set(Proxy p, std::optional<double> v) {
    values[static_cast<std::size_t>(p)] = v;
  }
  bool complete() const {
    return std::all_of(values.begin(), values.end(),
                       [](const auto &v) { return v.has_value(); });
  }
};

/// All proxies for one utterance. Throws DomainError when the utterance has no
/// phonation or a component's precondition fails; callers flag and skip it.
inline ProxyVector extract_proxies(const UtteranceRecord &record,
                                   const Waveform &w,
                                   const AcousticsConfig &cfg = {}) {
  const auto track = estimate_f0(w, cfg);
  const auto seg = segment_pauses(w, cfg);
  if (seg.phonation_s <= 0.0)
    throw DomainError("extract_proxies: '" + record.id + "' has no phonation");
  const auto rates = syllable_nuclei(w, seg, cfg);
  const auto formants = estimate_formants(w, track, cfg);

  ProxyVector v;
  v.set(Proxy::kArousal, record.arousal);
  if (formants) {
    v.set(Proxy::kF1Median, formants->f1);
    v.set(Proxy::kF2Median, formants->f2);
    v.set(Proxy::kF3Median, formants->f3);
  }
  v.set(Proxy::kMeanF0, mean_f0(track));
  v.set(Proxy::kVoicingRatio, voicing_ratio(track));
  v.set(Proxy::kSpectralFlux, spectral_flux_mean(w, cfg));
  v.set(Proxy::kSyllableRate, rates.syllable_rate);
  v.set(Proxy::kArticulationRate, rates.articulation_rate);
  v.set(Proxy::kPauseRatio, seg.pause_ratio());
  v.set(Proxy::kMeanPause, seg.mean_pause_s());
  return v;
}

inline Json proxies_to_json(const std::string &id, const ProxyVector &v) {
  Json o;
  o["id"] = id;
  for (const auto &info : kProxyInfo)
    o[info.key] = optional_to_json(v.get(info.proxy));
  return o;
}

inline Json flagged_to_json(const std::string &id, const std::string &reason) {
  Json o;
  o["id"] = id;
  o["flagged"] = reason;
  return o;
}

using ProxyTable = std::map<std::string, ProxyVector>;

/// Reads a proxy file; flagged lines are skipped.
inline ProxyTable load_proxies(const std::filesystem::path &path) {
  ProxyTable out;
  for (const auto &line : read_lines(path)) {
    if (line.object.contains("flagged")) continue;
    ProxyVector v;
    for (const auto &info : kProxyInfo)
      v.set(info.proxy, get_optional_number(line, info.key));
    out[get_string(line, "id")] = v;
  }
  return out;
}

}  // namespace stylerank

#endif  // STYLERANK_ACOUSTICS_HPP_

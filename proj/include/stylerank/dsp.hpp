// stylerank/dsp.hpp

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

// Signal-processing building blocks used by the acoustic proxies.

#ifndef STYLERANK_DSP_HPP_
#define STYLERANK_DSP_HPP_

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stylerank/error.hpp"

namespace stylerank::dsp {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Number of full frames of `win` samples at hop `hop` in `n` samples.
inline std::size_t frame_count(std::size_t n, std::size_t win, std::size_t hop) {
  return n < win ? 0 : 1 + (n - win) / hop;
}

// Real-input FFT of fixed size backed by FFTW. Only fftw_execute_* is
// thread-safe in FFTW, so planning is serialized through one mutex.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        real_(static_cast<double *>(fftw_malloc(sizeof(double) * n))),
        spec_(static_cast<fftw_complex *>(
            fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.get(),
                                    spec_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_.get(),
                                    real_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Forward transform of `in`, zero-padded to size().
  void forward(std::span<const double> in,
               std::vector<std::complex<double>> &out) {
    const std::size_t m = std::min(in.size(), n_);
    std::copy_n(in.begin(), m, real_.get());
    std::fill(real_.get() + m, real_.get() + n_, 0.0);
    fftw_execute(forward_);
    out.resize(bins());
    for (std::size_t k = 0; k < bins(); ++k)
      out[k] = {spec_.get()[k][0], spec_.get()[k][1]};
  }

  /// Unnormalized inverse; the result is scaled by size().
  void inverse(std::span<const std::complex<double>> in,
               std::vector<double> &out) {
    for (std::size_t k = 0; k < bins(); ++k) {
      spec_.get()[k][0] = in[k].real();
      spec_.get()[k][1] = in[k].imag();
    }
    fftw_execute(inverse_);
    out.assign(real_.get(), real_.get() + n_);
  }

 private:
  struct FftwFree {
    void operator()(void *p) const { fftw_free(p); }
  };
  static std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  std::unique_ptr<double, FftwFree> real_;
  std::unique_ptr<fftw_complex, FftwFree> spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
  return w;
}

inline std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
  return w;
}

/// Band-limited resampling with a Hann-windowed sinc kernel whose cutoff sits
/// just below the lower of the two Nyquist rates.
inline std::vector<double> resample(std::span<const double> x, int rate_in,
                                    int rate_out, int zero_crossings = 16) {
  if (rate_in == rate_out) return {x.begin(), x.end()};
  const double ratio = static_cast<double>(rate_out) / rate_in;
  // Cutoff in cycles per input sample.
  const double fc = 0.5 * 0.95 * std::min(1.0, ratio);
  const double radius = zero_crossings / (2.0 * fc);
  const std::size_t n_out =
      static_cast<std::size_t>(std::floor(x.size() * ratio));
  std::vector<double> y(n_out, 0.0);
  const long n_in = static_cast<long>(x.size());
  for (std::size_t n = 0; n < n_out; ++n) {
    const double t = n / ratio;
    const long lo = std::max(0L, static_cast<long>(std::ceil(t - radius)));
    const long hi = std::min(n_in - 1, static_cast<long>(std::floor(t + radius)));
    double acc = 0.0;
    for (long k = lo; k <= hi; ++k) {
      const double d = t - k;
      const double u = 2.0 * fc * d;
      const double sinc =
          u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * d / radius);
      acc += x[k] * 2.0 * fc * sinc * win;
    }
    y[n] = acc;
  }
  return y;
}

/// Second-order Butterworth low-pass (bilinear transform, pre-warped).
struct Biquad {
  double b0, b1, b2, a1, a2;

  static Biquad butterworth_lowpass(double cutoff_hz, double rate_hz) {
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
    const double alpha = std::sin(w0) / std::numbers::sqrt2;
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
            -2.0 * c / a0, (1.0 - alpha) / a0};
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.size());
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    // Start in steady state for a constant input equal to x[0].
    if (!x.empty()) {
      x1 = x2 = x[0];
      y1 = y2 = x[0];
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = b0 * x[i] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = x[i];
      y2 = y1;
      y1 = v;
      y[i] = v;
    }
    return y;
  }
};

/// Zero-phase filtering (forward then backward) with odd reflection padding
/// of `pad` samples at each edge.
inline std::vector<double> filtfilt(const Biquad &f, std::span<const double> x,
                                    std::size_t pad) {
  if (x.empty()) return {};
  pad = std::min(pad, x.size() - 1);
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  const std::size_t last = x.size() - 1;
  for (std::size_t i = 1; i <= pad; ++i)
    ext.push_back(2.0 * x[last] - x[last - i]);
  auto fwd = f.apply(ext);
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = f.apply(fwd);
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<long>(pad),
          bwd.begin() + static_cast<long>(pad + x.size())};
}

/// Linear-prediction polynomial by Burg's method. Returns a[0..order] with
/// a[0] = 1 such that sum_k a[k] x[n-k] is the forward prediction error.
/// Returns an empty vector for zero-energy input.
inline std::vector<double> burg_lpc(std::span<const double> x, int order) {
  const std::size_t n = x.size();
  if (order < 1 || n <= static_cast<std::size_t>(order))
    throw DomainError("burg_lpc: need more samples than the model order");
  std::vector<double> f(x.begin(), x.end()), b(x.begin(), x.end());
  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  const std::size_t last = n - 1;
  double denom = 0.0;
  for (double v : x) denom += 2.0 * v * v;
  denom -= f[0] * f[0] + b[last] * b[last];
  if (!(denom > 0.0)) return {};
  for (int k = 0; k < order; ++k) {
    double num = 0.0;
    for (std::size_t i = 0; i + k + 1 <= last; ++i) num += f[i + k + 1] * b[i];
    const double mu = -2.0 * num / denom;
    for (int i = 0; i <= (k + 1) / 2; ++i) {
      const double t1 = a[i] + mu * a[k + 1 - i];
      const double t2 = a[k + 1 - i] + mu * a[i];
      a[i] = t1;
      a[k + 1 - i] = t2;
    }
    for (std::size_t i = 0; i + k + 1 <= last; ++i) {
      const double t1 = f[i + k + 1] + mu * b[i];
      const double t2 = b[i] + mu * f[i + k + 1];
      f[i + k + 1] = t1;
      b[i] = t2;
    }
    denom = (1.0 - mu * mu) * denom - f[k + 1] * f[k + 1] -
            b[last - k - 1] * b[last - k - 1];
    if (!(denom > 0.0)) break;
  }
  return a;
}

/// Roots of the polynomial c[0] z^p + c[1] z^(p-1) + ... + c[p] (c[0] != 0)
/// as eigenvalues of its companion matrix.
inline std::vector<std::complex<double>> polynomial_roots(
    std::span<const double> c) {
  const int p = static_cast<int>(c.size()) - 1;
  if (p < 1) return {};
  if (c[0] == 0.0) throw DomainError("polynomial_roots: leading coefficient is 0");
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) companion(0, j) = -c[j + 1] / c[0];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return {};
  std::vector<std::complex<double>> roots(p);
  for (int i = 0; i < p; ++i) roots[i] = solver.eigenvalues()[i];
  return roots;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace stylerank::dsp

#endif  // STYLERANK_DSP_HPP_

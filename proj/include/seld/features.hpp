#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "seld/error.hpp"
#include "seld/scene.hpp"

namespace seld {

struct AudioClip {
  int sample_rate = kSampleRate;
  std::vector<std::vector<float>> channels;  // channels[c][sample]

  int num_channels() const { return static_cast<int>(channels.size()); }
  size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
};

/// Window 40 ms (1920 samples) zero-padded to a 2048-point FFT, hop 20 ms;
/// bins 1..1024 kept (DC dropped), giving 3000 x 1024 for a 60 s clip.
struct StftConfig {
  int sample_rate = kSampleRate;
  int window_len = 1920;
  int hop = 960;
  int fft_size = 2048;
  int n_bins = 1024;
  int n_frames = kNumFrames;

  double bin_freq_hz(int bin) const {
    // stored bin k corresponds to FFT bin k+1
    return (bin + 1) * static_cast<double>(sample_rate) / fft_size;
  }
};

template <typename T>
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c) {}

  T& at(size_t r, size_t c) { return data[r * cols + c]; }
  const T& at(size_t r, size_t c) const { return data[r * cols + c]; }
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

namespace detail {

// FFTW plan creation is not thread-safe; execution on plan-local buffers is
// serialized per instance by giving each thread its own RealFft.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // in must hold n() samples; out gets n()/2+1 bins.
  void transform(const double* in, std::complex<double>* out) {
    std::copy(in, in + n_, in_);
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) out[k] = {out_[k][0], out_[k][1]};
  }

  int n() const { return n_; }

 private:
  static std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
  }

  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

inline std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

}  // namespace detail

/// Pad with zeros or truncate so the clip is exactly 60 s long.
inline std::vector<float> fit_to_duration(std::span<const float> samples,
                                          const StftConfig& cfg = {}) {
  const size_t target = static_cast<size_t>(cfg.sample_rate * kClipSeconds);
  std::vector<float> out(samples.begin(),
                         samples.begin() + std::min(samples.size(), target));
  out.resize(target, 0.0f);
  return out;
}

inline ComplexMatrix stft(std::span<const float> channel_samples, const StftConfig& cfg = {}) {
  if (cfg.sample_rate != kSampleRate)
    throw ConfigMismatch("stft: expected 48 kHz sample rate");
  const std::vector<float> fitted = fit_to_duration(channel_samples, cfg);
  const std::vector<double> window = detail::hann_window(cfg.window_len);
  detail::RealFft fft(cfg.fft_size);

  ComplexMatrix spec(cfg.n_frames, cfg.n_bins);
  std::vector<double> buf(cfg.fft_size, 0.0);
  std::vector<std::complex<double>> bins(cfg.fft_size / 2 + 1);
  for (int f = 0; f < cfg.n_frames; ++f) {
    const size_t start = static_cast<size_t>(f) * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i) {
      const size_t idx = start + i;
      buf[i] = idx < fitted.size() ? fitted[idx] * window[i] : 0.0;
    }
    fft.transform(buf.data(), bins.data());
    for (int k = 0; k < cfg.n_bins; ++k) spec.at(f, k) = bins[k + 1];
  }
  return spec;
}

inline constexpr double kDbFloor = 1e-10;  // keeps log finite on exact zeros

inline RealMatrix to_amplitude_db(const ComplexMatrix& spec) {
  RealMatrix out(spec.rows, spec.cols);
  for (size_t i = 0; i < spec.data.size(); ++i)
    out.data[i] = 20.0 * std::log10(std::max(std::abs(spec.data[i]), kDbFloor));
  return out;
}

inline RealMatrix to_phase(const ComplexMatrix& spec) {
  RealMatrix out(spec.rows, spec.cols);
  for (size_t i = 0; i < spec.data.size(); ++i) out.data[i] = std::arg(spec.data[i]);
  return out;
}

/// Per-frequency-bin mean and population standard deviation over time.
struct BinStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline BinStats compute_bin_stats(const RealMatrix& m) {
  BinStats s;
  s.mean.assign(m.cols, 0.0);
  s.stddev.assign(m.cols, 0.0);
  if (m.rows == 0) return s;
  for (size_t r = 0; r < m.rows; ++r)
    for (size_t c = 0; c < m.cols; ++c) s.mean[c] += m.at(r, c);
  for (size_t c = 0; c < m.cols; ++c) s.mean[c] /= static_cast<double>(m.rows);
  for (size_t r = 0; r < m.rows; ++r)
    for (size_t c = 0; c < m.cols; ++c) {
      const double d = m.at(r, c) - s.mean[c];
      s.stddev[c] += d * d;
    }
  for (size_t c = 0; c < m.cols; ++c)
    s.stddev[c] = std::sqrt(s.stddev[c] / static_cast<double>(m.rows));
  return s;
}

/// (value - mean) / std per bin; bins with std below 1e-12 map to zero.
inline RealMatrix standardize_freqwise(const RealMatrix& m, const BinStats& stats) {
  if (stats.mean.size() != m.cols || stats.stddev.size() != m.cols)
    throw InvalidArgument("standardize_freqwise: stats shape mismatch");
  RealMatrix out(m.rows, m.cols);
  for (size_t c = 0; c < m.cols; ++c) {
    const double mu = stats.mean[c];
    const double sd = stats.stddev[c];
    for (size_t r = 0; r < m.rows; ++r)
      out.at(r, c) = sd < 1e-12 ? 0.0 : (m.at(r, c) - mu) / sd;
  }
  return out;
}

/// 4 standardized amplitude-dB spectrograms plus 4 standardized phase
/// spectrograms, one pair per FOA channel.
struct FeatureTensor {
  int channels = 4;
  int frames = kNumFrames;
  int bins = 1024;
  std::vector<RealMatrix> amplitude_db;
  std::vector<RealMatrix> phase;
};

/// Corpus-level standardization stats: one BinStats per spectrogram slot,
/// amplitude channels 0..3 then phase channels 0..3.
struct FeatureStats {
  std::vector<BinStats> slots;  // size 8 when present
};

inline FeatureTensor extract_features(const AudioClip& clip,
                                      const FeatureStats* stats = nullptr,
                                      const StftConfig& cfg = {}) {
  if (clip.num_channels() != 4)
    throw ConfigMismatch("extract_features: expected 4 FOA channels");
  if (clip.sample_rate != cfg.sample_rate)
    throw ConfigMismatch("extract_features: expected 48 kHz sample rate");
  if (stats && stats->slots.size() != 8)
    throw InvalidArgument("extract_features: stats must have 8 slots");

  FeatureTensor t;
  t.frames = cfg.n_frames;
  t.bins = cfg.n_bins;
  for (int c = 0; c < 4; ++c) {
    const ComplexMatrix spec = stft(clip.channels[c], cfg);
    const RealMatrix amp = to_amplitude_db(spec);
    const RealMatrix ph = to_phase(spec);
    const BinStats amp_stats = stats ? stats->slots[c] : compute_bin_stats(amp);
    const BinStats ph_stats = stats ? stats->slots[4 + c] : compute_bin_stats(ph);
    t.amplitude_db.push_back(standardize_freqwise(amp, amp_stats));
    t.phase.push_back(standardize_freqwise(ph, ph_stats));
  }
  return t;
}

}  // namespace seld

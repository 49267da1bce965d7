#pragma once

#include <array>
#include <memory>
#include <vector>

#include "seld/error.hpp"
#include "seld/features.hpp"
#include "seld/geometry.hpp"

namespace seld {

/// Raw per-frame network outputs for one recording. Class rows are
/// independent sigmoid activations and need not sum to 1.
struct FramePredictionSet {
  std::vector<float> noas;                        // n_frames
  std::vector<std::array<float, 3>> doa1;         // n_frames x xyz
  std::vector<std::array<float, 3>> doa2;         // n_frames x xyz (second source)
  std::vector<std::array<float, kNumClasses>> class_probs;

  int n_frames() const { return static_cast<int>(noas.size()); }
};

/// The four single-task predictors the decoder consumes. Implementations are
/// pure with respect to a loaded recording; concurrent queries are allowed.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::vector<float> predict_noas() const = 0;
  virtual std::vector<CartesianDoa> predict_doa1(int begin_frame, int end_frame) const = 0;
  virtual std::vector<CartesianDoa> predict_doa2(int begin_frame, int end_frame,
                                                 const CartesianDoa& associated) const = 0;
  virtual std::vector<std::array<float, kNumClasses>> predict_class(int begin_frame,
                                                                    int end_frame) const = 0;
};

/// Answers queries by slicing stored arrays. A static file cannot re-run
/// doa2 inference per associated DOA, so doa2 queries return the stored
/// second-source track and ignore the associated argument.
class FilePredictor : public Predictor {
 public:
  explicit FilePredictor(FramePredictionSet preds) : preds_(std::move(preds)) {
    const int n = preds_.n_frames();
    if (static_cast<int>(preds_.doa1.size()) != n ||
        static_cast<int>(preds_.doa2.size()) != n ||
        static_cast<int>(preds_.class_probs.size()) != n)
      throw FormatError("FilePredictor: subtask frame counts disagree");
  }

  std::vector<float> predict_noas() const override { return preds_.noas; }

  std::vector<CartesianDoa> predict_doa1(int begin, int end) const override {
    check_range(begin, end);
    std::vector<CartesianDoa> out;
    out.reserve(end - begin);
    for (int f = begin; f < end; ++f)
      out.push_back({preds_.doa1[f][0], preds_.doa1[f][1], preds_.doa1[f][2]});
    return out;
  }

  std::vector<CartesianDoa> predict_doa2(int begin, int end,
                                         const CartesianDoa&) const override {
    check_range(begin, end);
    std::vector<CartesianDoa> out;
    out.reserve(end - begin);
    for (int f = begin; f < end; ++f)
      out.push_back({preds_.doa2[f][0], preds_.doa2[f][1], preds_.doa2[f][2]});
    return out;
  }

  std::vector<std::array<float, kNumClasses>> predict_class(int begin, int end) const override {
    check_range(begin, end);
    return {preds_.class_probs.begin() + begin, preds_.class_probs.begin() + end};
  }

  const FramePredictionSet& predictions() const { return preds_; }

 private:
  void check_range(int begin, int end) const {
    if (begin < 0 || end > preds_.n_frames() || begin > end)
      throw InvalidArgument("FilePredictor: frame range out of bounds");
  }

  FramePredictionSet preds_;
};

/// Analytic single-source DOA from the FOA intensity vector
/// I = sum_bins Re{conj(W) * (X, Y, Z)} over an energy-weighted band.
class IntensityDoaEstimator {
 public:
  struct FrameDoa {
    CartesianDoa dir;
    bool confident = false;
  };

  IntensityDoaEstimator(const AudioClip& clip, const StftConfig& cfg = {},
                        double band_lo_hz = 200.0, double band_hi_hz = 8000.0)
      : cfg_(cfg) {
    if (clip.num_channels() != 4)
      throw ConfigMismatch("IntensityDoaEstimator: expected 4 FOA channels");
    for (int c = 0; c < 4; ++c) specs_.push_back(stft(clip.channels[c], cfg));
    bin_lo_ = 0;
    while (bin_lo_ < cfg.n_bins && cfg.bin_freq_hz(bin_lo_) < band_lo_hz) ++bin_lo_;
    bin_hi_ = bin_lo_;
    while (bin_hi_ < cfg.n_bins && cfg.bin_freq_hz(bin_hi_) <= band_hi_hz) ++bin_hi_;
  }

  std::vector<FrameDoa> estimate(int begin_frame, int end_frame) const {
    if (begin_frame < 0 || end_frame > cfg_.n_frames || begin_frame > end_frame)
      throw InvalidArgument("IntensityDoaEstimator: frame range out of bounds");
    std::vector<FrameDoa> out;
    out.reserve(end_frame - begin_frame);
    for (int f = begin_frame; f < end_frame; ++f) {
      CartesianDoa acc{0.0, 0.0, 0.0};
      for (int k = bin_lo_; k < bin_hi_; ++k) {
        const auto w = std::conj(specs_[0].at(f, k));
        acc.x += (w * specs_[1].at(f, k)).real();
        acc.y += (w * specs_[2].at(f, k)).real();
        acc.z += (w * specs_[3].at(f, k)).real();
      }
      FrameDoa fd;
      const double n = acc.norm();
      if (n > 1e-12) {
        fd.dir = {acc.x / n, acc.y / n, acc.z / n};
        fd.confident = true;
      }
      out.push_back(fd);
    }
    return out;
  }

 private:
  StftConfig cfg_;
  std::vector<ComplexMatrix> specs_;
  int bin_lo_ = 0;
  int bin_hi_ = 0;
};

/// noas/class from a base predictor, DOA from the intensity vector. doa2 is
/// the same intensity estimate; only meaningful on single-source material.
class AnalyticDoaPredictor : public Predictor {
 public:
  AnalyticDoaPredictor(std::shared_ptr<Predictor> base,
                       std::shared_ptr<IntensityDoaEstimator> estimator)
      : base_(std::move(base)), estimator_(std::move(estimator)) {}

  std::vector<float> predict_noas() const override { return base_->predict_noas(); }

  std::vector<CartesianDoa> predict_doa1(int begin, int end) const override {
    return intensity(begin, end);
  }

  std::vector<CartesianDoa> predict_doa2(int begin, int end,
                                         const CartesianDoa&) const override {
    return intensity(begin, end);
  }

  std::vector<std::array<float, kNumClasses>> predict_class(int begin, int end) const override {
    return base_->predict_class(begin, end);
  }

 private:
  std::vector<CartesianDoa> intensity(int begin, int end) const {
    std::vector<CartesianDoa> out;
    for (const auto& fd : estimator_->estimate(begin, end))
      if (fd.confident) out.push_back(fd.dir);
    if (out.empty())
      throw DecodeError("AnalyticDoaPredictor: no confident frames in chunk [" +
                        std::to_string(begin) + ", " + std::to_string(end) + ")");
    return out;
  }

  std::shared_ptr<Predictor> base_;
  std::shared_ptr<IntensityDoaEstimator> estimator_;
};

}  // namespace seld

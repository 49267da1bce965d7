#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "seld/error.hpp"
#include "seld/predict.hpp"
#include "seld/scene.hpp"

namespace seld {

struct SimConfig {
  int n_events_min = 5;
  int n_events_max = 10;
  double event_len_min_s = 1.0;
  double event_len_max_s = 8.0;
  int el_min_deg = -40;  // TAU recording setup spans [-40, 40]
  int el_max_deg = 40;
  double edge_margin_s = 0.2;
  // Minimum spacing between any two onset/offset instants. Keeps every
  // change of the active set visible as a NOAS change.
  double min_boundary_gap_s = 0.1;
  uint64_t seed = 42;
};

namespace detail {

inline int max_overlap_within(const std::vector<EventSpec>& events, double lo, double hi) {
  int best = 0;
  std::vector<double> points;
  points.push_back(lo + 1e-9);
  for (const auto& e : events) {
    if (e.onset_s > lo && e.onset_s < hi) points.push_back(e.onset_s + 1e-9);
  }
  for (double t : points) {
    int depth = 0;
    for (const auto& e : events)
      if (event_active_at(e, t)) ++depth;
    best = std::max(best, depth);
  }
  return best;
}

}  // namespace detail

/// Random valid scene. Concurrent events always differ in both grid DOA and
/// class so the step-4/step-6 disambiguation rules are well-posed; all events
/// in a scene get distinct grid DOAs.
inline SceneScript generate_scene(const SimConfig& cfg, std::mt19937_64& rng) {
  if (cfg.n_events_min > cfg.n_events_max || cfg.event_len_min_s > cfg.event_len_max_s)
    throw InvalidArgument("generate_scene: empty range in config");
  std::uniform_int_distribution<int> n_events_dist(cfg.n_events_min, cfg.n_events_max);
  std::uniform_real_distribution<double> len_dist(cfg.event_len_min_s, cfg.event_len_max_s);
  std::uniform_int_distribution<int> az_dist(-18, 17);
  std::uniform_int_distribution<int> el_dist(cfg.el_min_deg / 10, cfg.el_max_deg / 10);
  std::uniform_int_distribution<int> class_dist(0, kNumClasses - 1);

  const int n_events = n_events_dist(rng);
  for (int scene_try = 0; scene_try < 64; ++scene_try) {
    SceneScript script;
    bool ok = true;
    for (int i = 0; i < n_events && ok; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const double len = len_dist(rng);
        std::uniform_real_distribution<double> onset_dist(
            cfg.edge_margin_s, kClipSeconds - cfg.edge_margin_s - len);
        EventSpec e;
        // millisecond quantization keeps the metadata CSV round trip exact
        e.onset_s = std::round(onset_dist(rng) * 1000.0) / 1000.0;
        e.offset_s = std::round((e.onset_s + len) * 1000.0) / 1000.0;
        e.doa = {az_dist(rng) * 10, el_dist(rng) * 10};
        e.class_id = class_dist(rng);

        bool feasible = true;
        for (const auto& other : script.events) {
          for (double b : {other.onset_s, other.offset_s})
            for (double c : {e.onset_s, e.offset_s})
              if (std::abs(b - c) < cfg.min_boundary_gap_s) feasible = false;
          if (e.doa == other.doa) feasible = false;
          const bool overlaps = e.onset_s < other.offset_s && other.onset_s < e.offset_s;
          if (overlaps && e.class_id == other.class_id) feasible = false;
        }
        if (feasible &&
            detail::max_overlap_within(script.events, e.onset_s, e.offset_s) > 1)
          feasible = false;
        if (feasible) {
          script.events.push_back(e);
          placed = true;
        }
      }
      if (!placed) ok = false;
    }
    if (ok) {
      std::sort(script.events.begin(), script.events.end(),
                [](const EventSpec& a, const EventSpec& b) { return a.onset_s < b.onset_s; });
      validate_script(script);
      return script;
    }
  }
  throw GenerationError("generate_scene: could not place events without 3-deep overlap");
}

namespace detail {

// Paul Kellet's economy pink noise filter over white Gaussian input.
inline std::vector<float> pink_noise(size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<float> out(n);
  double b0 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double w = white(rng);
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    out[i] = static_cast<float>(0.1 * (b0 + b1 + b2 + w * 0.1848));
  }
  return out;
}

}  // namespace detail

/// Plane-wave first-order ambisonic encoding, channels ordered (W, X, Y, Z)
/// with gains W = s, X = cos(el)cos(az) s, Y = cos(el)sin(az) s, Z = sin(el) s.
/// Sources are pink noise bursts with 10 ms raised-cosine ramps.
inline AudioClip encode_foa(const SceneScript& script, std::mt19937_64& rng,
                            int sample_rate = kSampleRate) {
  const size_t n_samples = static_cast<size_t>(sample_rate * script.duration_s);
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels.assign(4, std::vector<float>(n_samples, 0.0f));

  const size_t ramp_len = static_cast<size_t>(0.010 * sample_rate);
  for (const auto& e : script.events) {
    const size_t start = static_cast<size_t>(std::llround(e.onset_s * sample_rate));
    const size_t len = static_cast<size_t>(std::llround((e.offset_s - e.onset_s) * sample_rate));
    std::vector<float> sig = detail::pink_noise(len, rng);
    for (size_t i = 0; i < std::min(ramp_len, len); ++i) {
      const float g = 0.5f - 0.5f * std::cos(std::numbers::pi * i / ramp_len);
      sig[i] *= g;
      sig[len - 1 - i] *= g;
    }
    const CartesianDoa g = sph_to_cart(e.doa);
    const double gains[4] = {1.0, g.x, g.y, g.z};
    for (int c = 0; c < 4; ++c) {
      auto& ch = clip.channels[c];
      for (size_t i = 0; i < len && start + i < n_samples; ++i)
        ch[start + i] += static_cast<float>(gains[c] * sig[i]);
    }
  }
  return clip;
}

struct NoiseConfig {
  double noas_flip_rate = 0.0;   // probability a frame's NOAS is replaced
  double doa_jitter_deg = 0.0;   // angular jitter scale on DOA outputs
  double class_temp = 0.0;       // blends one-hot class rows toward 0.5
};

/// Stands in for the four trained networks. With the noise config zeroed the
/// predictions are exact. Noise draws are fixed per seed and scaled by the
/// config, so raising a noise parameter perturbs a superset of frames.
class OraclePredictor : public Predictor {
 public:
  OraclePredictor(SceneScript script, const NoiseConfig& noise = {}, uint64_t seed = 0,
                  FrameGrid grid = {})
      : script_(std::move(script)), noise_(noise), grid_(grid) {
    const int n = grid_.n_frames;
    active_.resize(n);
    for (int f = 0; f < n; ++f) {
      active_[f] = active_event_indices(script_, grid_, f);
      // front = earliest onset, back = latest
      std::stable_sort(active_[f].begin(), active_[f].end(), [&](int a, int b) {
        return script_.events[a].onset_s < script_.events[b].onset_s;
      });
    }

    std::mt19937_64 rng(seed ^ 0x5e1dULL);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    flip_u_.resize(n);
    flip_alt_.resize(n);
    jitter_mag_.resize(n);
    jitter_phi_.resize(n);
    for (int f = 0; f < n; ++f) {
      flip_u_[f] = uni(rng);
      flip_alt_[f] = static_cast<int>(uni(rng) * 2.0);
      jitter_mag_[f] = gauss(rng);
      jitter_phi_[f] = uni(rng) * 2.0 * std::numbers::pi;
    }
  }

  std::vector<float> predict_noas() const override {
    std::vector<float> out(grid_.n_frames);
    for (int f = 0; f < grid_.n_frames; ++f) {
      int c = static_cast<int>(active_[f].size());
      if (flip_u_[f] < noise_.noas_flip_rate) {
        int alt[2], k = 0;
        for (int v = 0; v <= 2; ++v)
          if (v != c) alt[k++] = v;
        c = alt[std::min(flip_alt_[f], 1)];
      }
      out[f] = static_cast<float>(c);
    }
    return out;
  }

  std::vector<CartesianDoa> predict_doa1(int begin, int end) const override {
    std::vector<CartesianDoa> out;
    for (int f = begin; f < end; ++f) {
      CartesianDoa d{1.0, 0.0, 0.0};
      if (!active_[f].empty()) d = sph_to_cart(script_.events[active_[f].front()].doa);
      out.push_back(jitter(d, f));
    }
    return out;
  }

  // The "other" source: the active event farthest from the associated DOA.
  std::vector<CartesianDoa> predict_doa2(int begin, int end,
                                         const CartesianDoa& associated) const override {
    std::vector<CartesianDoa> out;
    for (int f = begin; f < end; ++f) {
      CartesianDoa d = associated;
      double best = -1.0;
      for (int idx : active_[f]) {
        const CartesianDoa c = sph_to_cart(script_.events[idx].doa);
        const double dist = angular_distance_deg(associated, c);
        if (dist > best) {
          best = dist;
          d = c;
        }
      }
      out.push_back(jitter(d, f));
    }
    return out;
  }

  std::vector<std::array<float, kNumClasses>> predict_class(int begin, int end) const override {
    std::vector<std::array<float, kNumClasses>> out;
    for (int f = begin; f < end; ++f) {
      std::array<float, kNumClasses> row{};
      for (int idx : active_[f]) row[script_.events[idx].class_id] = 1.0f;
      for (auto& v : row)
        v = static_cast<float>((1.0 - noise_.class_temp) * v + 0.5 * noise_.class_temp);
      out.push_back(row);
    }
    return out;
  }

  /// Static per-frame arrays in the prediction-file layout. The doa2 track
  /// holds the later-onset source in two-source frames.
  FramePredictionSet materialize() const {
    FramePredictionSet p;
    p.noas = predict_noas();
    p.doa1 = to_floats(predict_doa1(0, grid_.n_frames));
    std::vector<CartesianDoa> doa2;
    for (int f = 0; f < grid_.n_frames; ++f) {
      CartesianDoa d{1.0, 0.0, 0.0};
      if (!active_[f].empty()) d = sph_to_cart(script_.events[active_[f].back()].doa);
      doa2.push_back(jitter(d, f));
    }
    p.doa2 = to_floats(doa2);
    p.class_probs = predict_class(0, grid_.n_frames);
    return p;
  }

  const SceneScript& script() const { return script_; }

 private:
  CartesianDoa jitter(const CartesianDoa& d, int f) const {
    if (noise_.doa_jitter_deg <= 0.0) return d;
    const double a = jitter_mag_[f] * noise_.doa_jitter_deg * kRadPerDeg;
    // orthonormal tangent basis at d
    CartesianDoa ref = std::abs(d.z) < 0.9 ? CartesianDoa{0, 0, 1} : CartesianDoa{1, 0, 0};
    CartesianDoa t1{d.y * ref.z - d.z * ref.y, d.z * ref.x - d.x * ref.z,
                    d.x * ref.y - d.y * ref.x};
    const double n1 = t1.norm();
    t1 = {t1.x / n1, t1.y / n1, t1.z / n1};
    CartesianDoa t2{d.y * t1.z - d.z * t1.y, d.z * t1.x - d.x * t1.z,
                    d.x * t1.y - d.y * t1.x};
    const double ct = std::cos(a), st = std::sin(a);
    const double cp = std::cos(jitter_phi_[f]), sp = std::sin(jitter_phi_[f]);
    return {ct * d.x + st * (cp * t1.x + sp * t2.x),
            ct * d.y + st * (cp * t1.y + sp * t2.y),
            ct * d.z + st * (cp * t1.z + sp * t2.z)};
  }

  static std::vector<std::array<float, 3>> to_floats(const std::vector<CartesianDoa>& vs) {
    std::vector<std::array<float, 3>> out;
    out.reserve(vs.size());
    for (const auto& v : vs)
      out.push_back({static_cast<float>(v.x), static_cast<float>(v.y),
                     static_cast<float>(v.z)});
    return out;
  }

  SceneScript script_;
  NoiseConfig noise_;
  FrameGrid grid_;
  std::vector<std::vector<int>> active_;
  std::vector<double> flip_u_;
  std::vector<int> flip_alt_;
  std::vector<double> jitter_mag_;
  std::vector<double> jitter_phi_;
};

inline FramePredictionSet oracle_predictions(const SceneScript& script,
                                             const NoiseConfig& noise, uint64_t seed,
                                             const FrameGrid& grid = {}) {
  return OraclePredictor(script, noise, seed, grid).materialize();
}

}  // namespace seld

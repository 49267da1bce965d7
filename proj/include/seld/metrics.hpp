#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include "seld/geometry.hpp"
#include "seld/scene.hpp"

namespace seld {

inline constexpr int kSegmentFrames = 50;  // 1 s segments on the 20 ms grid

struct MetricsReport {
  double error_rate = 0.0;
  double f_score = 1.0;
  double doa_error_deg = 0.0;
  double frame_recall = 1.0;
  double seld_score = 0.0;
  bool doa_defined = true;  // false when no frame produced a DOA match
};

inline double seld_score(double error_rate, double f_score, double doa_error_deg,
                         double frame_recall) {
  return (error_rate + (1.0 - f_score) + doa_error_deg / 180.0 + (1.0 - frame_recall)) / 4.0;
}

/// Raw counts so multiple recordings can be pooled before computing rates.
struct MetricsCounts {
  // segment-based detection counts
  double substitutions = 0, deletions = 0, insertions = 0, actives = 0;
  double tp = 0, fp = 0, fn = 0;
  // frame-wise localization counts
  double matched_angle_deg = 0;
  long matches = 0;
  long frames_count_correct = 0;
  long frames = 0;

  MetricsCounts& operator+=(const MetricsCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    actives += o.actives;
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    matched_angle_deg += o.matched_angle_deg;
    matches += o.matches;
    frames_count_correct += o.frames_count_correct;
    frames += o.frames;
    return *this;
  }
};

namespace detail {

// Minimum-total-angular-distance assignment between two small DOA sets;
// enumerates all injective pairings (sets have at most 2 entries in valid
// scenes, but larger inputs are handled the same way).
inline std::pair<double, int> match_doa_sets(std::vector<CartesianDoa> a,
                                             std::vector<CartesianDoa> b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return {0.0, 0};
  std::vector<int> idx(b.size());
  std::iota(idx.begin(), idx.end(), 0);
  double best = -1.0;
  std::sort(idx.begin(), idx.end());
  do {
    double total = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
      total += angular_distance_deg(a[i], b[idx[i]]);
    if (best < 0.0 || total < best) best = total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return {best, static_cast<int>(a.size())};
}

}  // namespace detail

/// Segment-based detection counts plus frame-wise localization counts, per
/// the DCASE 2019 conventions: 1 s segments with per-class activity bitmaps,
/// ER = (S + D + I) / N, F = 2TP / (2TP + FP + FN).
inline MetricsCounts accumulate_metrics(const SceneScript& pred, const SceneScript& ref,
                                        const FrameGrid& grid = {},
                                        int segment_frames = kSegmentFrames) {
  MetricsCounts counts;
  const int n_segments = (grid.n_frames + segment_frames - 1) / segment_frames;

  auto active_classes = [&](const SceneScript& s, int seg) {
    std::array<bool, kNumClasses> act{};
    const int f0 = seg * segment_frames;
    const int f1 = std::min(grid.n_frames, f0 + segment_frames);
    for (const auto& e : s.events)
      for (int f = f0; f < f1; ++f)
        if (event_active_at(e, grid.frame_center_s(f))) {
          act[e.class_id] = true;
          break;
        }
    return act;
  };

  for (int seg = 0; seg < n_segments; ++seg) {
    const auto ref_act = active_classes(ref, seg);
    const auto pred_act = active_classes(pred, seg);
    double tp = 0, fp = 0, fn = 0, n = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      if (ref_act[c]) ++n;
      if (ref_act[c] && pred_act[c]) ++tp;
      if (!ref_act[c] && pred_act[c]) ++fp;
      if (ref_act[c] && !pred_act[c]) ++fn;
    }
    const double s = std::min(fn, fp);
    counts.substitutions += s;
    counts.deletions += fn - s;
    counts.insertions += fp - s;
    counts.actives += n;
    counts.tp += tp;
    counts.fp += fp;
    counts.fn += fn;
  }

  for (int f = 0; f < grid.n_frames; ++f) {
    const double t = grid.frame_center_s(f);
    std::vector<CartesianDoa> ref_doas, pred_doas;
    for (const auto& e : ref.events)
      if (event_active_at(e, t)) ref_doas.push_back(sph_to_cart(e.doa));
    for (const auto& e : pred.events)
      if (event_active_at(e, t)) pred_doas.push_back(sph_to_cart(e.doa));
    ++counts.frames;
    if (ref_doas.size() == pred_doas.size()) ++counts.frames_count_correct;
    const auto [total, m] = detail::match_doa_sets(ref_doas, pred_doas);
    counts.matched_angle_deg += total;
    counts.matches += m;
  }
  return counts;
}

inline MetricsReport report_from_counts(const MetricsCounts& c) {
  MetricsReport r;
  r.error_rate = c.actives > 0
                     ? (c.substitutions + c.deletions + c.insertions) / c.actives
                     : (c.insertions > 0 ? 1.0 : 0.0);
  const double denom = 2 * c.tp + c.fp + c.fn;
  r.f_score = denom > 0 ? 2 * c.tp / denom : 1.0;
  if (c.matches > 0) {
    r.doa_error_deg = c.matched_angle_deg / c.matches;
  } else {
    // no matched frame anywhere: report the worst case and flag it
    const bool anything_active = c.actives > 0 || c.fp > 0;
    r.doa_error_deg = anything_active ? 180.0 : 0.0;
    r.doa_defined = !anything_active;
  }
  r.frame_recall =
      c.frames > 0 ? static_cast<double>(c.frames_count_correct) / c.frames : 1.0;
  r.seld_score = seld_score(r.error_rate, r.f_score, r.doa_error_deg, r.frame_recall);
  return r;
}

inline MetricsReport evaluate(const SceneScript& pred, const SceneScript& ref,
                              const FrameGrid& grid = {}) {
  return report_from_counts(accumulate_metrics(pred, ref, grid));
}

inline std::pair<double, double> segment_er_f(const SceneScript& pred, const SceneScript& ref,
                                              const FrameGrid& grid = {},
                                              int segment_frames = kSegmentFrames) {
  const MetricsReport r =
      report_from_counts(accumulate_metrics(pred, ref, grid, segment_frames));
  return {r.error_rate, r.f_score};
}

inline std::pair<double, double> doa_error_and_frame_recall(const SceneScript& pred,
                                                            const SceneScript& ref,
                                                            const FrameGrid& grid = {}) {
  const MetricsReport r = report_from_counts(accumulate_metrics(pred, ref, grid));
  return {r.doa_error_deg, r.frame_recall};
}

}  // namespace seld

// Test-only brute-force scorers, independent of the metrics implementation.
#pragma once

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "seld/geometry.hpp"
#include "seld/metrics.hpp"
#include "seld/scene.hpp"

namespace seld::test {

// Explicit per-class activity bitmaps, ER/F recomputed from scratch.
inline std::pair<double, double> brute_force_er_f(const SceneScript& pred,
                                                  const SceneScript& ref,
                                                  const FrameGrid& grid) {
  const int n_segments = (grid.n_frames + kSegmentFrames - 1) / kSegmentFrames;
  auto bitmaps = [&](const SceneScript& s) {
    std::vector<std::vector<bool>> act(n_segments, std::vector<bool>(kNumClasses, false));
    for (int f = 0; f < grid.n_frames; ++f)
      for (const auto& e : s.events)
        if (event_active_at(e, grid.frame_center_s(f)))
          act[f / kSegmentFrames][e.class_id] = true;
    return act;
  };
  const auto r = bitmaps(ref), p = bitmaps(pred);
  double S = 0, D = 0, I = 0, N = 0, TP = 0, FP = 0, FN = 0;
  for (int seg = 0; seg < n_segments; ++seg) {
    double tp = 0, fp = 0, fn = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      if (r[seg][c] && p[seg][c]) ++tp;
      if (!r[seg][c] && p[seg][c]) ++fp;
      if (r[seg][c] && !p[seg][c]) ++fn;
      if (r[seg][c]) ++N;
    }
    S += std::min(fn, fp);
    D += fn - std::min(fn, fp);
    I += fp - std::min(fn, fp);
    TP += tp;
    FP += fp;
    FN += fn;
  }
  const double er = N > 0 ? (S + D + I) / N : (I > 0 ? 1.0 : 0.0);
  const double f = (2 * TP + FP + FN) > 0 ? 2 * TP / (2 * TP + FP + FN) : 1.0;
  return {er, f};
}

// Exhaustive pairing enumeration for the frame-wise DOA match.
inline double brute_force_doa_error(const SceneScript& pred, const SceneScript& ref,
                                    const FrameGrid& grid) {
  double total = 0;
  long matches = 0;
  for (int f = 0; f < grid.n_frames; ++f) {
    const double t = grid.frame_center_s(f);
    std::vector<CartesianDoa> a, b;
    for (const auto& e : ref.events)
      if (event_active_at(e, t)) a.push_back(sph_to_cart(e.doa));
    for (const auto& e : pred.events)
      if (event_active_at(e, t)) b.push_back(sph_to_cart(e.doa));
    if (a.size() > b.size()) std::swap(a, b);
    if (a.empty()) continue;
    std::vector<int> idx(b.size());
    std::iota(idx.begin(), idx.end(), 0);
    double best = 1e300;
    do {
      double s = 0;
      for (size_t i = 0; i < a.size(); ++i) s += angular_distance_deg(a[i], b[idx[i]]);
      best = std::min(best, s);
    } while (std::next_permutation(idx.begin(), idx.end()));
    total += best;
    matches += static_cast<long>(a.size());
  }
  return matches > 0 ? total / matches : 0.0;
}

}  // namespace seld::test

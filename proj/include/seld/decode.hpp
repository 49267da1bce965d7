#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "seld/error.hpp"
#include "seld/geometry.hpp"
#include "seld/predict.hpp"
#include "seld/scene.hpp"

namespace seld {

/// Post-processed per-frame source counts: values in {0,1,2}, first and last
/// frame zero, adjacent frames differ by at most 1.
struct NoasTrack {
  std::vector<int> counts;

  int n_frames() const { return static_cast<int>(counts.size()); }

  bool valid() const {
    if (counts.empty()) return false;
    if (counts.front() != 0 || counts.back() != 0) return false;
    for (size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] < 0 || counts[i] > 2) return false;
      if (i > 0 && std::abs(counts[i] - counts[i - 1]) > 1) return false;
    }
    return true;
  }
};

/// Round raw network outputs (half away from zero), clamp to {0,1,2}, force
/// the endpoints to zero, then clamp step sizes to 1 with a left-to-right and
/// a right-to-left pass. Idempotent.
inline NoasTrack postprocess_noas(std::span<const float> raw) {
  NoasTrack t;
  const int n = static_cast<int>(raw.size());
  t.counts.resize(n);
  for (int i = 0; i < n; ++i) {
    const long r = std::lround(static_cast<double>(raw[i]));
    t.counts[i] = static_cast<int>(std::clamp(r, 0L, 2L));
  }
  if (n == 0) return t;
  t.counts.front() = 0;
  t.counts.back() = 0;
  for (int i = 1; i < n; ++i)
    t.counts[i] = std::clamp(t.counts[i], t.counts[i - 1] - 1, t.counts[i - 1] + 1);
  t.counts.back() = 0;
  for (int i = n - 2; i >= 0; --i)
    t.counts[i] = std::clamp(t.counts[i], t.counts[i + 1] - 1, t.counts[i + 1] + 1);
  return t;
}

/// Maximal run of frames with constant NOAS; [begin, end) with end exclusive.
struct Chunk {
  int begin = 0;
  int end = 0;
  int noas = 0;

  int length() const { return end - begin; }
};

inline std::vector<Chunk> segment_chunks(const NoasTrack& track) {
  std::vector<Chunk> chunks;
  const int n = track.n_frames();
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || track.counts[i] != track.counts[start]) {
      chunks.push_back({start, i, track.counts[start]});
      start = i;
    }
  }
  return chunks;
}

/// Event onset plus the offsets it could still end at. Offsets are exclusive
/// end frames (the frame right after the last active one).
struct EventSkeleton {
  int onset_frame = 0;
  std::vector<int> candidate_offsets;
};

/// Step 3: a NOAS increase opens an event at the second frame of the pair; a
/// decrease appends the boundary as a candidate offset to every event opened
/// since NOAS was last zero.
inline std::vector<EventSkeleton> deduce_skeletons(const NoasTrack& track) {
  if (!track.valid()) throw InvalidArgument("deduce_skeletons: invalid NOAS track");
  std::vector<EventSkeleton> skeletons;
  std::vector<int> open;  // indices of events since last NOAS=0
  for (int i = 1; i < track.n_frames(); ++i) {
    const int prev = track.counts[i - 1];
    const int cur = track.counts[i];
    if (cur > prev) {
      open.push_back(static_cast<int>(skeletons.size()));
      skeletons.push_back({i, {}});
    } else if (cur < prev) {
      for (int idx : open) skeletons[idx].candidate_offsets.push_back(i);
      if (cur == 0) open.clear();
    }
  }
  return skeletons;
}

/// An event with resolved span and DOA, before classification.
struct ResolvedEvent {
  int onset_frame = 0;
  int offset_frame = 0;
  GridDoa doa;
  std::vector<Chunk> solo_chunks;          // NOAS=1 chunks this event owns
  std::optional<Chunk> overlap_chunk;      // set for overlap-only events
  int associated_index = -1;               // outer event, for overlap-only events
};

struct DecodedEvent {
  int onset_frame = 0;
  int offset_frame = 0;
  GridDoa doa;
  int class_id = 0;
};

namespace detail {

inline GridDoa chunk_grid_doa(const Predictor& predictor, const Chunk& chunk,
                              const CartesianDoa* associated) {
  std::vector<CartesianDoa> dirs =
      associated ? predictor.predict_doa2(chunk.begin, chunk.end, *associated)
                 : predictor.predict_doa1(chunk.begin, chunk.end);
  try {
    return round_to_grid(cart_to_sph(mean_direction(dirs)));
  } catch (const DegenerateDirection&) {
    throw DecodeError("decode: degenerate mean direction in chunk [" +
                      std::to_string(chunk.begin) + ", " + std::to_string(chunk.end) + ")");
  }
}

}  // namespace detail

/// Steps 4 and 5: per NOAS=1 chunk DOAs decide which event closed at which
/// candidate offset; equal grid DOA across a NOAS=2 chunk means the outer
/// event spans both sides and the inner event lived inside the overlap, where
/// its DOA comes from doa2 conditioned on the outer event's direction.
inline std::vector<ResolvedEvent> resolve_offsets_and_doas(
    const std::vector<EventSkeleton>& skeletons, const std::vector<Chunk>& chunks,
    const Predictor& predictor) {
  std::vector<ResolvedEvent> events;
  events.reserve(skeletons.size());
  for (const auto& s : skeletons) events.push_back({s.onset_frame, -1, {}, {}, {}, -1});

  size_t next_event = 0;
  size_t i = 0;
  while (i < chunks.size()) {
    if (chunks[i].noas == 0) {
      ++i;
      continue;
    }
    // A group between zero chunks always alternates 1,2,1,...,1.
    if (chunks[i].noas != 1)
      throw DecodeError("decode: group starts with NOAS=" + std::to_string(chunks[i].noas));
    if (next_event >= events.size() || events[next_event].onset_frame != chunks[i].begin)
      throw DecodeError("decode: skeleton onsets disagree with chunk boundaries");
    size_t current = next_event++;
    events[current].solo_chunks.push_back(chunks[i]);
    GridDoa current_doa = detail::chunk_grid_doa(predictor, chunks[i], nullptr);

    while (i + 2 < chunks.size() && chunks[i + 1].noas == 2) {
      const Chunk& overlap = chunks[i + 1];
      const Chunk& next_solo = chunks[i + 2];
      if (next_event >= events.size() || events[next_event].onset_frame != overlap.begin)
        throw DecodeError("decode: skeleton onsets disagree with chunk boundaries");
      const size_t opened = next_event++;
      const GridDoa next_doa = detail::chunk_grid_doa(predictor, next_solo, nullptr);
      if (next_doa == current_doa) {
        // first event covers both chunks; the opened event started and ended
        // inside the overlap
        events[opened].offset_frame = overlap.end;
        events[opened].overlap_chunk = overlap;
        events[opened].associated_index = static_cast<int>(current);
        const CartesianDoa assoc = sph_to_cart(current_doa);
        events[opened].doa = detail::chunk_grid_doa(predictor, overlap, &assoc);
      } else {
        // first event ended when the next solo chunk started
        events[current].offset_frame = overlap.end;
        events[current].doa = current_doa;
        current = opened;
        current_doa = next_doa;
      }
      events[current].solo_chunks.push_back(next_solo);
      i += 2;
    }
    if (i + 1 < chunks.size() && chunks[i + 1].noas == 2)
      throw DecodeError("decode: group ends inside a NOAS=2 chunk");
    events[current].offset_frame = chunks[i].end;
    events[current].doa = current_doa;
    ++i;
  }
  if (next_event != events.size())
    throw DecodeError("decode: unresolved skeleton events remain");
  return events;
}

/// Step 6: soft voting. Events owning NOAS=1 chunks take the argmax of
/// summed class probabilities over those chunks; overlap-only events take the
/// most probable class in their overlap chunk that differs from the
/// associated event's class. Ties break toward the lowest class id.
inline std::vector<DecodedEvent> assign_classes(const std::vector<ResolvedEvent>& events,
                                                const Predictor& predictor) {
  std::vector<DecodedEvent> out(events.size());
  std::vector<int> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  // associated (solo-chunk) events must be classified before overlap-only ones
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return events[a].solo_chunks.empty() < events[b].solo_chunks.empty();
  });

  for (int idx : order) {
    const ResolvedEvent& e = events[idx];
    std::array<double, kNumClasses> votes{};
    std::vector<Chunk> chunks = e.solo_chunks;
    if (chunks.empty() && e.overlap_chunk) chunks.push_back(*e.overlap_chunk);
    for (const auto& c : chunks)
      for (const auto& row : predictor.predict_class(c.begin, c.end))
        for (int k = 0; k < kNumClasses; ++k) votes[k] += row[k];

    int banned = -1;
    if (e.solo_chunks.empty() && e.associated_index >= 0)
      banned = out[e.associated_index].class_id;
    int best = -1;
    for (int k = 0; k < kNumClasses; ++k) {
      if (k == banned) continue;
      if (best < 0 || votes[k] > votes[best]) best = k;
    }
    out[idx] = {e.onset_frame, e.offset_frame, e.doa, best};
  }
  return out;
}

/// The full consecutive ensemble, steps 1 through 6.
inline std::vector<DecodedEvent> decode(const Predictor& predictor) {
  const NoasTrack track = postprocess_noas(predictor.predict_noas());
  const std::vector<Chunk> chunks = segment_chunks(track);
  const std::vector<EventSkeleton> skeletons = deduce_skeletons(track);
  const std::vector<ResolvedEvent> resolved =
      resolve_offsets_and_doas(skeletons, chunks, predictor);
  return assign_classes(resolved, predictor);
}

/// Frame-indexed events back to a seconds-based script for scoring/export.
inline SceneScript decoded_to_script(const std::vector<DecodedEvent>& events,
                                     const FrameGrid& grid = {}) {
  SceneScript s;
  s.duration_s = grid.n_frames * grid.frame_len_s;
  for (const auto& e : events)
    s.events.push_back({e.class_id, e.onset_frame * grid.frame_len_s,
                        e.offset_frame * grid.frame_len_s, e.doa});
  return s;
}

}  // namespace seld

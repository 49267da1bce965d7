#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seld/error.hpp"
#include "seld/features.hpp"
#include "seld/predict.hpp"

namespace seld {

namespace detail {

inline void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& out, const float* data, size_t count) {
  // assumes little-endian IEEE host, true for every supported target
  out.write(reinterpret_cast<const char*>(data), count * sizeof(float));
}

inline void read_f32(std::istream& in, float* data, size_t count, const std::string& what) {
  in.read(reinterpret_cast<char*>(data), count * sizeof(float));
  if (!in) throw FormatError(what + ": truncated file");
}

}  // namespace detail

// --- WAV ---------------------------------------------------------------

/// RIFF WAVE, PCM16 or IEEE float32. Channel count and rate are validated by
/// the caller-facing wrappers below.
inline void write_wav(const AudioClip& clip, const std::filesystem::path& path,
                      bool as_float = true) {
  const uint32_t channels = clip.num_channels();
  const uint32_t frames = static_cast<uint32_t>(clip.num_samples());
  const uint16_t bits = as_float ? 32 : 16;
  const uint16_t fmt = as_float ? 3 : 1;
  const uint32_t byte_rate = clip.sample_rate * channels * bits / 8;
  const uint32_t data_bytes = frames * channels * bits / 8;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_wav: cannot open " + path.string());
  out.write("RIFF", 4);
  detail::write_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  detail::write_u32(out, 16);
  const uint16_t block_align = channels * bits / 8;
  out.put(static_cast<char>(fmt)).put(static_cast<char>(fmt >> 8));
  out.put(static_cast<char>(channels)).put(static_cast<char>(channels >> 8));
  detail::write_u32(out, clip.sample_rate);
  detail::write_u32(out, byte_rate);
  out.put(static_cast<char>(block_align)).put(static_cast<char>(block_align >> 8));
  out.put(static_cast<char>(bits)).put(static_cast<char>(bits >> 8));
  out.write("data", 4);
  detail::write_u32(out, data_bytes);

  std::vector<char> buf;
  buf.reserve(data_bytes);
  for (uint32_t i = 0; i < frames; ++i) {
    for (uint32_t c = 0; c < channels; ++c) {
      const float s = clip.channels[c][i];
      if (as_float) {
        char b[4];
        std::memcpy(b, &s, 4);
        buf.insert(buf.end(), b, b + 4);
      } else {
        const int v = std::clamp(static_cast<int>(std::lround(s * 32767.0f)), -32768, 32767);
        buf.push_back(static_cast<char>(v & 0xff));
        buf.push_back(static_cast<char>((v >> 8) & 0xff));
      }
    }
  }
  out.write(buf.data(), buf.size());
}

inline AudioClip read_wav(const std::filesystem::path& path, int expected_channels = 4,
                          int expected_rate = kSampleRate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_wav: cannot open " + path.string());
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw FormatError("read_wav: not a RIFF file: " + path.string());
  detail::read_u32(in);
  in.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0)
    throw FormatError("read_wav: not a WAVE file: " + path.string());

  uint16_t fmt = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<char> data;
  while (in.read(tag, 4)) {
    const uint32_t size = detail::read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      std::vector<char> chunk(size);
      in.read(chunk.data(), size);
      if (size < 16) throw FormatError("read_wav: short fmt chunk");
      fmt = static_cast<uint8_t>(chunk[0]) | (static_cast<uint8_t>(chunk[1]) << 8);
      channels = static_cast<uint8_t>(chunk[2]) | (static_cast<uint8_t>(chunk[3]) << 8);
      std::memcpy(&rate, chunk.data() + 4, 4);
      bits = static_cast<uint8_t>(chunk[14]) | (static_cast<uint8_t>(chunk[15]) << 8);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(size);
      in.read(data.data(), size);
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  if (data.empty() && channels == 0)
    throw FormatError("read_wav: missing fmt/data chunks: " + path.string());
  if (expected_channels > 0 && channels != expected_channels)
    throw FormatError("read_wav: expected " + std::to_string(expected_channels) +
                      " channels, got " + std::to_string(channels) + ": " + path.string());
  if (expected_rate > 0 && rate != static_cast<uint32_t>(expected_rate))
    throw FormatError("read_wav: expected " + std::to_string(expected_rate) + " Hz, got " +
                      std::to_string(rate) + ": " + path.string());
  if (fmt != 1 && fmt != 3)
    throw FormatError("read_wav: unsupported sample format: " + path.string());
  if ((fmt == 1 && bits != 16) || (fmt == 3 && bits != 32))
    throw FormatError("read_wav: unsupported bit depth: " + path.string());

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  const size_t bytes_per_sample = bits / 8;
  const size_t n_frames = data.size() / (bytes_per_sample * channels);
  clip.channels.assign(channels, std::vector<float>(n_frames));
  const char* p = data.data();
  for (size_t i = 0; i < n_frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      if (fmt == 3) {
        float v;
        std::memcpy(&v, p, 4);
        clip.channels[c][i] = v;
      } else {
        const int16_t v = static_cast<int16_t>(static_cast<uint8_t>(p[0]) |
                                               (static_cast<uint8_t>(p[1]) << 8));
        clip.channels[c][i] = static_cast<float>(v) / 32767.0f;
      }
      p += bytes_per_sample;
    }
  }
  return clip;
}

// --- Feature tensor file ------------------------------------------------
// 32-byte header: magic "SELDFT01", u32 channels, frames, bins, dtype (0 =
// f32), 8 bytes reserved; then amplitude block, then phase block, both
// channel-major row-major f32.

inline void write_feature_file(const FeatureTensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_feature_file: cannot open " + path.string());
  out.write("SELDFT01", 8);
  detail::write_u32(out, t.channels);
  detail::write_u32(out, t.frames);
  detail::write_u32(out, t.bins);
  detail::write_u32(out, 0);
  const char zeros[8] = {};
  out.write(zeros, 8);
  auto write_block = [&](const std::vector<RealMatrix>& block) {
    std::vector<float> row(t.bins);
    for (const auto& m : block)
      for (size_t r = 0; r < m.rows; ++r) {
        for (size_t c = 0; c < m.cols; ++c) row[c] = static_cast<float>(m.at(r, c));
        detail::write_f32(out, row.data(), row.size());
      }
  };
  write_block(t.amplitude_db);
  write_block(t.phase);
}

inline FeatureTensor read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_feature_file: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SELDFT01", 8) != 0)
    throw FormatError("read_feature_file: bad magic: " + path.string());
  FeatureTensor t;
  t.channels = static_cast<int>(detail::read_u32(in));
  t.frames = static_cast<int>(detail::read_u32(in));
  t.bins = static_cast<int>(detail::read_u32(in));
  const uint32_t dtype = detail::read_u32(in);
  in.seekg(8, std::ios::cur);
  if (dtype != 0) throw FormatError("read_feature_file: unknown dtype: " + path.string());
  auto read_block = [&](std::vector<RealMatrix>& block) {
    std::vector<float> row(t.bins);
    for (int c = 0; c < t.channels; ++c) {
      RealMatrix m(t.frames, t.bins);
      for (int r = 0; r < t.frames; ++r) {
        detail::read_f32(in, row.data(), row.size(), "read_feature_file " + path.string());
        for (int k = 0; k < t.bins; ++k) m.at(r, k) = row[k];
      }
      block.push_back(std::move(m));
    }
  };
  read_block(t.amplitude_db);
  read_block(t.phase);
  return t;
}

// --- Prediction files ---------------------------------------------------
// Header: magic "SELDPR01", u32 subtask {0=noas,1=doa1,2=doa2,3=class}, u32
// frames, u32 width; then frames x width f32 row-major.

enum class Subtask : uint32_t { kNoas = 0, kDoa1 = 1, kDoa2 = 2, kClass = 3 };

inline int subtask_width(Subtask s) {
  switch (s) {
    case Subtask::kNoas: return 1;
    case Subtask::kDoa1:
    case Subtask::kDoa2: return 3;
    case Subtask::kClass: return kNumClasses;
  }
  throw InvalidArgument("subtask_width: bad subtask");
}

inline void write_prediction_file(Subtask subtask, const std::vector<float>& rows,
                                  int n_frames, const std::filesystem::path& path) {
  const int width = subtask_width(subtask);
  if (static_cast<int>(rows.size()) != n_frames * width)
    throw InvalidArgument("write_prediction_file: data size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_prediction_file: cannot open " + path.string());
  out.write("SELDPR01", 8);
  detail::write_u32(out, static_cast<uint32_t>(subtask));
  detail::write_u32(out, n_frames);
  detail::write_u32(out, width);
  detail::write_f32(out, rows.data(), rows.size());
}

inline std::vector<float> read_prediction_file(Subtask expected_subtask,
                                               const std::filesystem::path& path,
                                               int expected_frames = kNumFrames) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_prediction_file: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SELDPR01", 8) != 0)
    throw FormatError("read_prediction_file: bad magic: " + path.string());
  const uint32_t subtask = detail::read_u32(in);
  const uint32_t frames = detail::read_u32(in);
  const uint32_t width = detail::read_u32(in);
  if (subtask != static_cast<uint32_t>(expected_subtask))
    throw FormatError("read_prediction_file: wrong subtask code: " + path.string());
  if (width != static_cast<uint32_t>(subtask_width(expected_subtask)))
    throw FormatError("read_prediction_file: wrong row width: " + path.string());
  if (expected_frames > 0 && frames != static_cast<uint32_t>(expected_frames))
    throw FormatError("read_prediction_file: expected " + std::to_string(expected_frames) +
                      " frames, got " + std::to_string(frames) + ": " + path.string());
  std::vector<float> rows(static_cast<size_t>(frames) * width);
  detail::read_f32(in, rows.data(), rows.size(), "read_prediction_file " + path.string());
  return rows;
}

struct PredictionPaths {
  std::filesystem::path noas, doa1, doa2, class_probs;
};

inline void write_prediction_set(const FramePredictionSet& p, const PredictionPaths& paths) {
  const int n = p.n_frames();
  write_prediction_file(Subtask::kNoas, p.noas, n, paths.noas);
  auto flatten3 = [](const std::vector<std::array<float, 3>>& rows) {
    std::vector<float> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
  };
  write_prediction_file(Subtask::kDoa1, flatten3(p.doa1), n, paths.doa1);
  write_prediction_file(Subtask::kDoa2, flatten3(p.doa2), n, paths.doa2);
  std::vector<float> cls;
  for (const auto& r : p.class_probs) cls.insert(cls.end(), r.begin(), r.end());
  write_prediction_file(Subtask::kClass, cls, n, paths.class_probs);
}

inline FramePredictionSet load_prediction_files(const PredictionPaths& paths,
                                                int expected_frames = kNumFrames) {
  FramePredictionSet p;
  p.noas = read_prediction_file(Subtask::kNoas, paths.noas, expected_frames);
  const int n = static_cast<int>(p.noas.size());
  auto unflatten3 = [&](const std::vector<float>& flat) {
    std::vector<std::array<float, 3>> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
    return rows;
  };
  p.doa1 = unflatten3(read_prediction_file(Subtask::kDoa1, paths.doa1, n));
  p.doa2 = unflatten3(read_prediction_file(Subtask::kDoa2, paths.doa2, n));
  const auto cls = read_prediction_file(Subtask::kClass, paths.class_probs, n);
  p.class_probs.resize(n);
  for (int i = 0; i < n; ++i)
    std::copy(cls.begin() + i * kNumClasses, cls.begin() + (i + 1) * kNumClasses,
              p.class_probs[i].begin());
  return p;
}

// --- Standardization stats file ----------------------------------------
// Magic "SELDST01", u32 slots, u32 bins, then per slot mean[bins] and
// stddev[bins] as f32.

inline void write_stats_file(const FeatureStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_stats_file: cannot open " + path.string());
  out.write("SELDST01", 8);
  detail::write_u32(out, static_cast<uint32_t>(stats.slots.size()));
  const uint32_t bins = stats.slots.empty() ? 0 : static_cast<uint32_t>(stats.slots[0].mean.size());
  detail::write_u32(out, bins);
  std::vector<float> row(bins);
  for (const auto& s : stats.slots) {
    for (uint32_t i = 0; i < bins; ++i) row[i] = static_cast<float>(s.mean[i]);
    detail::write_f32(out, row.data(), bins);
    for (uint32_t i = 0; i < bins; ++i) row[i] = static_cast<float>(s.stddev[i]);
    detail::write_f32(out, row.data(), bins);
  }
}

inline FeatureStats read_stats_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_stats_file: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SELDST01", 8) != 0)
    throw FormatError("read_stats_file: bad magic: " + path.string());
  const uint32_t slots = detail::read_u32(in);
  const uint32_t bins = detail::read_u32(in);
  FeatureStats stats;
  std::vector<float> row(bins);
  for (uint32_t s = 0; s < slots; ++s) {
    BinStats b;
    detail::read_f32(in, row.data(), bins, "read_stats_file " + path.string());
    b.mean.assign(row.begin(), row.end());
    detail::read_f32(in, row.data(), bins, "read_stats_file " + path.string());
    b.stddev.assign(row.begin(), row.end());
    stats.slots.push_back(std::move(b));
  }
  return stats;
}

// --- Dataset layout -----------------------------------------------------
// root/audio/<id>.wav, root/metadata/<id>.csv, root/features/<id>.ft,
// root/predictions/<id>.{noas,doa1,doa2,class}.bin -- the TAU basename
// convention, so a real dataset drops in without renaming.

struct RecordingBundle {
  std::string recording_id;
  std::optional<std::filesystem::path> audio;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> metadata;
  std::optional<PredictionPaths> predictions;
};

inline std::vector<RecordingBundle> scan_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw FormatError("scan_dataset: not a directory: " + root.string());
  std::map<std::string, RecordingBundle> bundles;
  auto touch = [&](const std::string& id) -> RecordingBundle& {
    auto& b = bundles[id];
    b.recording_id = id;
    return b;
  };
  auto scan = [&](const char* sub, const char* ext, auto assign) {
    const fs::path dir = root / sub;
    if (!fs::is_directory(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
      assign(touch(entry.path().stem().string()), entry.path());
    }
  };
  scan("audio", ".wav", [](RecordingBundle& b, const fs::path& p) { b.audio = p; });
  scan("metadata", ".csv", [](RecordingBundle& b, const fs::path& p) { b.metadata = p; });
  scan("features", ".ft", [](RecordingBundle& b, const fs::path& p) { b.features = p; });

  const fs::path pred_dir = root / "predictions";
  if (fs::is_directory(pred_dir)) {
    for (const auto& entry : fs::directory_iterator(pred_dir)) {
      const std::string name = entry.path().filename().string();
      const auto pos = name.find(".noas.bin");
      if (pos == std::string::npos) continue;
      const std::string id = name.substr(0, pos);
      PredictionPaths paths{pred_dir / (id + ".noas.bin"), pred_dir / (id + ".doa1.bin"),
                            pred_dir / (id + ".doa2.bin"), pred_dir / (id + ".class.bin")};
      touch(id).predictions = paths;
    }
  }

  std::vector<RecordingBundle> out;
  for (auto& [id, b] : bundles) out.push_back(std::move(b));  // map is id-sorted
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_text_file: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_text_file: cannot open " + path.string());
  out.write(text.data(), text.size());
}

}  // namespace seld

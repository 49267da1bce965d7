#include <catch_amalgamated.hpp>

#include <random>

#include "seld/features.hpp"
#include "seld/simulate.hpp"

using namespace seld;

TEST_CASE("stft of silence is all zeros with the right shape") {
  const std::vector<float> zeros(48000 * 60, 0.0f);
  const ComplexMatrix spec = stft(zeros);
  REQUIRE(spec.rows == 3000);
  REQUIRE(spec.cols == 1024);
  for (const auto& z : spec.data) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("stft peak bin for a 1 kHz sine") {
  std::vector<float> sine(48000 * 60);
  for (size_t i = 0; i < sine.size(); ++i)
    sine[i] = static_cast<float>(std::sin(2.0 * std::numbers::pi * 1000.0 * i / 48000.0));
  const ComplexMatrix spec = stft(sine);
  // 1000 Hz / (48000/2048) = 42.67 -> FFT bin 43 -> stored column 42 (DC dropped)
  for (int f : {10, 1500, 2990}) {
    size_t peak = 0;
    double best = -1.0;
    for (size_t k = 0; k < spec.cols; ++k) {
      const double a = std::abs(spec.at(f, k));
      if (a > best) {
        best = a;
        peak = k;
      }
    }
    CHECK(peak == 42);
  }
}

TEST_CASE("stft truncates long input and pads short input") {
  const std::vector<float> long_input(48000 * 61, 0.5f);
  CHECK(stft(long_input).rows == 3000);
  const std::vector<float> short_input(48000 * 10, 0.5f);
  CHECK(stft(short_input).rows == 3000);
}

TEST_CASE("stft rejects wrong sample rate") {
  StftConfig cfg;
  cfg.sample_rate = 44100;
  CHECK_THROWS_AS(stft(std::vector<float>(100), cfg), ConfigMismatch);
}

TEST_CASE("to_amplitude_db") {
  ComplexMatrix m(1, 3);
  m.at(0, 0) = {1.0, 0.0};
  m.at(0, 1) = {10.0, 0.0};
  m.at(0, 2) = {0.0, 0.0};
  const RealMatrix db = to_amplitude_db(m);
  CHECK(db.at(0, 0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(db.at(0, 1) == Catch::Approx(20.0));
  CHECK(db.at(0, 2) == Catch::Approx(-200.0));  // 20*log10(1e-10) floor
}

TEST_CASE("standardize_freqwise") {
  RealMatrix constant(10, 2);
  for (auto& v : constant.data) v = 7.0;
  const RealMatrix z = standardize_freqwise(constant, compute_bin_stats(constant));
  for (double v : z.data) CHECK(v == 0.0);  // zero-variance guard

  RealMatrix m(2, 2);
  m.at(0, 0) = -1;
  m.at(1, 0) = 1;
  m.at(0, 1) = 0;
  m.at(1, 1) = 10;
  const RealMatrix s = standardize_freqwise(m, compute_bin_stats(m));
  CHECK(s.at(0, 0) == Catch::Approx(-1.0));
  CHECK(s.at(1, 0) == Catch::Approx(1.0));
  CHECK(s.at(0, 1) == Catch::Approx(-1.0));  // mean 5, population std 5
  CHECK(s.at(1, 1) == Catch::Approx(1.0));

  BinStats wrong;
  wrong.mean.assign(3, 0.0);
  wrong.stddev.assign(3, 1.0);
  CHECK_THROWS_AS(standardize_freqwise(m, wrong), InvalidArgument);
}

TEST_CASE("extract_features on a simulated clip") {
  std::mt19937_64 rng(11);
  SimConfig cfg;
  cfg.n_events_min = cfg.n_events_max = 2;
  const SceneScript script = generate_scene(cfg, rng);
  const AudioClip clip = encode_foa(script, rng);
  const FeatureTensor t = extract_features(clip);

  REQUIRE(t.amplitude_db.size() == 4);
  REQUIRE(t.phase.size() == 4);
  for (const auto& m : t.amplitude_db) {
    REQUIRE(m.rows == 3000);
    REQUIRE(m.cols == 1024);
  }
  // no NaN/Inf anywhere
  for (const auto& block : {t.amplitude_db, t.phase})
    for (const auto& m : block)
      for (double v : m.data) REQUIRE(std::isfinite(v));

  // per-bin standardization holds on non-degenerate bins
  const auto& m = t.amplitude_db[0];
  for (size_t c = 0; c < m.cols; c += 97) {
    double mean = 0;
    for (size_t r = 0; r < m.rows; ++r) mean += m.at(r, c);
    mean /= m.rows;
    double var = 0;
    for (size_t r = 0; r < m.rows; ++r) var += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    var /= m.rows;
    const bool all_zero = var == 0.0 && mean == 0.0;
    if (!all_zero) {
      CHECK(std::abs(mean) < 1e-6);
      CHECK(std::abs(var - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("extract_features is deterministic") {
  std::mt19937_64 rng(12);
  SimConfig cfg;
  cfg.n_events_min = cfg.n_events_max = 1;
  const SceneScript script = generate_scene(cfg, rng);
  const AudioClip clip = encode_foa(script, rng);
  const FeatureTensor a = extract_features(clip);
  const FeatureTensor b = extract_features(clip);
  REQUIRE(a.amplitude_db[0].data == b.amplitude_db[0].data);
  REQUIRE(a.phase[3].data == b.phase[3].data);
}

TEST_CASE("silent clip standardizes to all zeros") {
  AudioClip clip;
  clip.channels.assign(4, std::vector<float>(48000 * 60, 0.0f));
  const FeatureTensor t = extract_features(clip);
  for (const auto& block : {t.amplitude_db, t.phase})
    for (const auto& m : block)
      for (double v : m.data) REQUIRE(v == 0.0);
}

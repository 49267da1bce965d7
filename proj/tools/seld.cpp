// Batch front end for the SELD pipeline: scene simulation, feature
// extraction, consecutive-ensemble decoding, and metric reports.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "seld/decode.hpp"
#include "seld/io.hpp"
#include "seld/metrics.hpp"
#include "seld/simulate.hpp"

namespace fs = std::filesystem;
using namespace seld;

namespace {

struct RunConfig {
  std::string root;
  std::string out;
  std::string pred;
  std::string stats_file;
  std::string components_file;
  uint64_t seed = 42;
  int scenes = 10;
  double noas_flip = 0.0;
  double doa_jitter_deg = 0.0;
  double class_temp = 0.0;
  bool analytic_doa = false;
  bool sweep = false;
  bool write_stats = false;
};

int worker_count(size_t n_items) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SELD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = v;
  }
  return std::max(1, std::min<int>(n, static_cast<int>(n_items)));
}

// Runs fn(i) for every index with a bounded pool; exceptions become error
// strings reported in index order.
std::vector<std::string> run_pool(size_t n_items, const std::function<void(size_t)>& fn) {
  std::vector<std::string> errors(n_items);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  const int n_threads = worker_count(n_items);
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  return errors;
}

uint64_t scene_seed(uint64_t base, int index) {
  return base * 1000003ULL + static_cast<uint64_t>(index);
}

std::string recording_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rec%03d", index);
  return buf;
}

PredictionPaths prediction_paths(const fs::path& dir, const std::string& id) {
  return {dir / (id + ".noas.bin"), dir / (id + ".doa1.bin"), dir / (id + ".doa2.bin"),
          dir / (id + ".class.bin")};
}

int cmd_simulate(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  fs::create_directories(out / "audio");
  fs::create_directories(out / "metadata");
  fs::create_directories(out / "predictions");
  const bool noisy = cfg.noas_flip > 0 || cfg.doa_jitter_deg > 0 || cfg.class_temp > 0;
  if (noisy) fs::create_directories(out / "predictions_noisy");

  std::ostringstream manifest;
  for (int i = 0; i < cfg.scenes; ++i) {
    const std::string id = recording_id(i);
    const uint64_t seed = scene_seed(cfg.seed, i);
    std::mt19937_64 rng(seed);
    const SceneScript script = generate_scene(SimConfig{.seed = seed}, rng);
    const AudioClip clip = encode_foa(script, rng);

    write_text_file(out / "metadata" / (id + ".csv"), write_metadata_csv(script));
    write_wav(clip, out / "audio" / (id + ".wav"));
    write_prediction_set(oracle_predictions(script, {}, seed),
                         prediction_paths(out / "predictions", id));
    if (noisy) {
      const NoiseConfig noise{cfg.noas_flip, cfg.doa_jitter_deg, cfg.class_temp};
      write_prediction_set(oracle_predictions(script, noise, seed),
                           prediction_paths(out / "predictions_noisy", id));
    }
    manifest << id << "\taudio/" << id << ".wav\tmetadata/" << id
             << ".csv\tpredictions/" << id << ".{noas,doa1,doa2,class}.bin\n";
  }
  write_text_file(out / "manifest.txt", manifest.str());
  std::cout << manifest.str();
  return 0;
}

int cmd_features(const RunConfig& cfg) {
  const fs::path root(cfg.root);
  fs::create_directories(root / "features");
  FeatureStats stats;
  const bool have_stats = !cfg.stats_file.empty() && fs::exists(cfg.stats_file);
  if (have_stats) stats = read_stats_file(cfg.stats_file);

  const auto bundles = scan_dataset(root);
  std::vector<const RecordingBundle*> with_audio;
  for (const auto& b : bundles)
    if (b.audio) with_audio.push_back(&b);

  if (cfg.write_stats) {
    // corpus-level stats: pooled mean/std per bin over all recordings
    std::vector<BinStats> acc(8);
    std::vector<std::vector<double>> sum(8), sumsq(8);
    for (int s = 0; s < 8; ++s) {
      sum[s].assign(1024, 0.0);
      sumsq[s].assign(1024, 0.0);
    }
    size_t frames_total = 0;
    for (const auto* b : with_audio) {
      const AudioClip clip = read_wav(*b->audio);
      for (int c = 0; c < 4; ++c) {
        const ComplexMatrix spec = stft(clip.channels[c]);
        const RealMatrix amp = to_amplitude_db(spec);
        const RealMatrix ph = to_phase(spec);
        for (size_t r = 0; r < amp.rows; ++r)
          for (size_t k = 0; k < amp.cols; ++k) {
            sum[c][k] += amp.at(r, k);
            sumsq[c][k] += amp.at(r, k) * amp.at(r, k);
            sum[4 + c][k] += ph.at(r, k);
            sumsq[4 + c][k] += ph.at(r, k) * ph.at(r, k);
          }
        if (c == 0) frames_total += amp.rows;
      }
    }
    FeatureStats corpus;
    for (int s = 0; s < 8; ++s) {
      BinStats b;
      for (int k = 0; k < 1024; ++k) {
        const double mu = sum[s][k] / std::max<size_t>(frames_total, 1);
        b.mean.push_back(mu);
        b.stddev.push_back(std::sqrt(std::max(0.0, sumsq[s][k] / std::max<size_t>(frames_total, 1) - mu * mu)));
      }
      corpus.slots.push_back(std::move(b));
    }
    write_stats_file(corpus, cfg.stats_file);
    stats = std::move(corpus);
  }

  const auto errors = run_pool(with_audio.size(), [&](size_t i) {
    const auto& b = *with_audio[i];
    const AudioClip clip = read_wav(*b.audio);
    const FeatureTensor t =
        extract_features(clip, (have_stats || cfg.write_stats) ? &stats : nullptr);
    write_feature_file(t, root / "features" / (b.recording_id + ".ft"));
  });
  int failed = 0;
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << with_audio[i]->recording_id << ": " << errors[i] << "\n";
      ++failed;
    }
  std::cout << "features: " << (with_audio.size() - failed) << " ok, " << failed
            << " failed\n";
  return failed == 0 ? 0 : 1;
}

int cmd_decode(const RunConfig& cfg) {
  const fs::path root(cfg.root);
  const fs::path out(cfg.out);
  fs::create_directories(out);
  auto bundles = scan_dataset(root);
  if (!cfg.pred.empty()) {
    // alternate predictions directory (e.g. predictions_noisy)
    for (auto& b : bundles) {
      const fs::path dir = root / cfg.pred;
      const auto paths = prediction_paths(dir, b.recording_id);
      b.predictions = fs::exists(paths.noas) ? std::optional(paths) : std::nullopt;
    }
  }
  std::erase_if(bundles, [&](const RecordingBundle& b) {
    return !b.predictions || (cfg.analytic_doa && !b.audio);
  });

  const auto errors = run_pool(bundles.size(), [&](size_t i) {
    const auto& b = bundles[i];
    auto base = std::make_shared<FilePredictor>(load_prediction_files(*b.predictions));
    std::vector<DecodedEvent> events;
    if (cfg.analytic_doa) {
      auto est = std::make_shared<IntensityDoaEstimator>(read_wav(*b.audio));
      events = decode(AnalyticDoaPredictor(base, est));
    } else {
      events = decode(*base);
    }
    write_text_file(out / (b.recording_id + ".csv"),
                    write_metadata_csv(decoded_to_script(events)));
  });
  int failed = 0;
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << bundles[i].recording_id << ": " << errors[i] << "\n";
      ++failed;
    }
  std::cout << "decode: " << (bundles.size() - failed) << " ok, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

std::string metrics_row(const std::string& label, const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", label.c_str(),
                r.error_rate, r.f_score, r.doa_error_deg, r.frame_recall, r.seld_score);
  return buf;
}

void print_table(const std::string& label, const MetricsReport& r) {
  std::printf("%-12s ER %.3f  F %.3f  DOA %7.3f  FR %.3f  SELD %.4f%s\n", label.c_str(),
              r.error_rate, r.f_score, r.doa_error_deg, r.frame_recall, r.seld_score,
              r.doa_defined ? "" : "  [no DOA matches]");
}

int eval_components_only(const RunConfig& cfg) {
  // CSV with header label,error_rate,f_score,doa_error,frame_recall
  std::istringstream in(read_text_file(cfg.components_file));
  std::string line;
  std::getline(in, line);
  std::string out_csv = "label,error_rate,f_score,doa_error_deg,frame_recall,seld_score\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = seld::detail::split_csv_row(line);
    if (cells.size() != 5) throw FormatError("components CSV: expected 5 columns");
    MetricsReport r;
    r.error_rate = std::stod(cells[1]);
    r.f_score = std::stod(cells[2]);
    r.doa_error_deg = std::stod(cells[3]);
    r.frame_recall = std::stod(cells[4]);
    r.seld_score = seld_score(r.error_rate, r.f_score, r.doa_error_deg, r.frame_recall);
    out_csv += metrics_row(cells[0], r);
    print_table(cells[0], r);
  }
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    write_text_file(fs::path(cfg.out) / "seld_scores.csv", out_csv);
  }
  return 0;
}

int eval_sweep(const RunConfig& cfg) {
  const fs::path root(cfg.root);
  const auto bundles = scan_dataset(root);
  std::vector<SceneScript> scripts;
  std::vector<uint64_t> seeds;
  int index = 0;
  for (const auto& b : bundles) {
    if (!b.metadata) continue;
    scripts.push_back(parse_metadata_csv(read_text_file(*b.metadata)));
    seeds.push_back(scene_seed(cfg.seed, index++));
  }
  std::string csv = "noas_flip,doa_jitter_deg,error_rate,f_score,doa_error_deg,frame_recall,seld_score\n";
  auto run_level = [&](double flip, double jitter) {
    MetricsCounts total;
    for (size_t i = 0; i < scripts.size(); ++i) {
      OraclePredictor oracle(scripts[i], {flip, jitter, 0.0}, seeds[i]);
      total += accumulate_metrics(decoded_to_script(decode(oracle)), scripts[i]);
    }
    const MetricsReport r = report_from_counts(total);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%.6f,%.6f,%.6f,%.6f,%.6f\n", flip, jitter,
                  r.error_rate, r.f_score, r.doa_error_deg, r.frame_recall, r.seld_score);
    csv += buf;
    char label[64];
    std::snprintf(label, sizeof(label), "f%.2f/j%.0f", flip, jitter);
    print_table(label, r);
  };
  for (double flip : {0.0, 0.05, 0.10}) run_level(flip, 0.0);
  for (double jitter : {3.0, 6.0}) run_level(0.0, jitter);
  fs::create_directories(cfg.out);
  write_text_file(fs::path(cfg.out) / "sweep.csv", csv);
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  if (!cfg.components_file.empty()) return eval_components_only(cfg);
  if (cfg.sweep) return eval_sweep(cfg);

  const fs::path root(cfg.root);
  const fs::path pred_dir(cfg.pred);
  const auto bundles = scan_dataset(root);
  std::vector<std::string> missing;
  std::vector<std::pair<std::string, MetricsReport>> rows;
  MetricsCounts total;
  for (const auto& b : bundles) {
    if (!b.metadata) continue;
    const fs::path pred_csv = pred_dir / (b.recording_id + ".csv");
    if (!fs::exists(pred_csv)) {
      missing.push_back(b.recording_id);
      continue;
    }
    const SceneScript ref = parse_metadata_csv(read_text_file(*b.metadata));
    const SceneScript pred = parse_metadata_csv(read_text_file(pred_csv), /*validate=*/false);
    const MetricsCounts c = accumulate_metrics(pred, ref);
    total += c;
    rows.emplace_back(b.recording_id, report_from_counts(c));
  }
  if (!missing.empty()) {
    std::cerr << "eval: missing decoded CSVs for:";
    for (const auto& id : missing) std::cerr << ' ' << id;
    std::cerr << "\n";
    return 1;
  }
  std::string csv = "recording_id,error_rate,f_score,doa_error_deg,frame_recall,seld_score\n";
  for (const auto& [id, r] : rows) {
    csv += metrics_row(id, r);
    print_table(id, r);
  }
  const MetricsReport agg = report_from_counts(total);
  csv += metrics_row("aggregate", agg);
  print_table("aggregate", agg);
  fs::create_directories(cfg.out);
  write_text_file(fs::path(cfg.out) / "report.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consecutive-ensemble SELD pipeline"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* sim = app.add_subcommand("simulate", "Generate scenes: audio, metadata, predictions");
  sim->add_option("--out", cfg.out, "Output dataset directory")->required();
  sim->add_option("--scenes", cfg.scenes, "Number of scenes");
  sim->add_option("--seed", cfg.seed, "Master RNG seed");
  sim->add_option("--noas-flip", cfg.noas_flip, "NOAS flip rate for the noisy prediction set");
  sim->add_option("--doa-jitter-deg", cfg.doa_jitter_deg, "DOA jitter for the noisy set");
  sim->add_option("--class-temp", cfg.class_temp, "Class softening for the noisy set");

  auto* feat = app.add_subcommand("features", "Extract feature tensors for a dataset");
  feat->add_option("--root", cfg.root, "Dataset root")->required();
  feat->add_option("--stats-file", cfg.stats_file, "Standardization stats file (corpus mode)");
  feat->add_flag("--write-stats", cfg.write_stats, "Compute corpus stats and write them first");

  auto* dec = app.add_subcommand("decode", "Decode predictions into event CSVs");
  dec->add_option("--root", cfg.root, "Dataset root")->required();
  dec->add_option("--out", cfg.out, "Directory for decoded event CSVs")->required();
  dec->add_option("--pred", cfg.pred, "Predictions subdirectory (default: predictions)");
  dec->add_flag("--analytic-doa", cfg.analytic_doa, "Intensity-vector DOA from audio");
  dec->add_option("--seed", cfg.seed, "Unused; accepted for script symmetry");

  auto* ev = app.add_subcommand("eval", "Score decoded events against metadata");
  ev->add_option("--root", cfg.root, "Dataset root with reference metadata");
  ev->add_option("--pred", cfg.pred, "Directory with decoded event CSVs");
  ev->add_option("--out", cfg.out, "Report output directory")->required();
  ev->add_option("--seed", cfg.seed, "Seed for --sweep oracle noise");
  ev->add_flag("--sweep", cfg.sweep, "Noise-level sweep with oracle predictions");
  ev->add_option("--components-only", cfg.components_file,
                 "Recompute SELD scores from a metric-components CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(cfg);
    if (feat->parsed()) return cmd_features(cfg);
    if (dec->parsed()) return cmd_decode(cfg);
    if (ev->parsed()) return cmd_eval(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

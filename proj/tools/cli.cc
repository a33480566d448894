// Copyright 2026 The Impulse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cli.h"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "impulse/corpus.h"
#include "impulse/detector.h"
#include "impulse/errors.h"
#include "impulse/evaluation.h"
#include "impulse/wav.h"
#include "json.hpp"

namespace impulse::cli {
namespace {

constexpr std::size_t kStreamChunk = 8192;

// Flag values are checked before any work starts; this marks the failures
// that map to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Detector flags shared by detect, eval-det and bench. Unset values fall back
// to DetectorConfig::Defaults() for the chosen variant.
struct DetectorFlags {
  std::string variant = "energy";
  std::optional<double> k;
  std::optional<int> frame_len;
  std::optional<int> history_len;
  std::optional<int> order;
  std::optional<double> lambda;
  std::optional<int> block_len;
  std::optional<int> merge_gap;
  std::optional<int> stat_hop;
  CLI::Option* lambda_opt = nullptr;
};

void AddDetectorFlags(CLI::App& app, DetectorFlags& f, bool with_variant) {
  if (with_variant) {
    app.add_option("--variant", f.variant, "energy, lpc or wlp")
        ->check(CLI::IsMember({"energy", "lpc", "wlp"}))
        ->capture_default_str();
  }
  app.add_option("--k", f.k, "threshold multiplier (energy 5, lpc/wlp 6)");
  app.add_option("--frame-len", f.frame_len, "energy frame length [350]");
  app.add_option("--history-len", f.history_len,
                 "background history: frames (energy, 30) or residual "
                 "samples (lpc/wlp, 4410)");
  app.add_option("--order", f.order, "prediction order [5]");
  f.lambda_opt = app.add_option("--lambda", f.lambda, "warping factor, wlp only [-0.7]");
  app.add_option("--block-len", f.block_len, "model refit period in samples [2048]");
  app.add_option("--merge-gap", f.merge_gap, "sample gap that splits lpc/wlp events [100]");
  app.add_option("--stat-hop", f.stat_hop, "residual deviation refresh period [441]");
}

DetectorConfig BuildConfig(const DetectorFlags& f, Variant variant) {
  if (f.lambda && variant != Variant::kWlp) {
    throw UsageError("--lambda only applies to --variant wlp");
  }
  DetectorConfig c = DetectorConfig::Defaults(variant);
  if (f.k) c.threshold_k = *f.k;
  if (f.frame_len) c.frame_len = *f.frame_len;
  if (f.history_len) c.history_len = *f.history_len;
  if (f.order) c.order = *f.order;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.block_len) c.block_len = *f.block_len;
  if (f.merge_gap) c.merge_gap = *f.merge_gap;
  if (f.stat_hop) c.stat_hop = *f.stat_hop;
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

Variant VariantOrThrow(const std::string& name) {
  const auto v = ParseVariant(name);
  if (!v) throw UsageError("unknown variant '" + name + "'");
  return *v;
}

// Writes to --out when given, otherwise to the command's output stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::trunc);
    if (!file_) throw IoError("cannot write " + path);
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string EventToJsonLine(const DetectionEvent& e, int sample_rate_hz) {
  nlohmann::ordered_json j;
  j["onset_sample"] = e.onset_sample;
  j["offset_sample"] = e.offset_sample;
  j["onset_seconds"] = static_cast<double>(e.onset_sample) / sample_rate_hz;
  j["peak_score"] = e.peak_score;
  j["variant"] = std::string(VariantName(e.variant));
  return j.dump();
}

// ---------------------------------------------------------------- gen-corpus

struct GenCorpusFlags {
  int count = 50;
  double clip_len_s = 30.0;
  std::vector<double> ebr = {-6.0, 0.0, 6.0};
  std::string event_kind = "gunshot";
  std::uint64_t seed = 0;
  std::string out_dir;
  int sample_rate_hz = kDefaultSampleRateHz;
  std::vector<std::string> backgrounds;
  std::vector<std::string> events;
};

void RunGenCorpus(const GenCorpusFlags& f, bool quiet, std::ostream& out,
                  std::ostream& err) {
  if (f.count < 1) throw UsageError("--count must be >= 1");
  if (f.ebr.empty()) throw UsageError("--ebr needs at least one level");
  if (f.backgrounds.empty() != f.events.empty()) {
    throw UsageError("--backgrounds and --events must be given together");
  }
  CorpusSpec spec;
  spec.count = f.count;
  spec.clip_len_s = f.clip_len_s;
  spec.ebr_levels = f.ebr;
  spec.event_kind = *ParseEventKind(f.event_kind);
  spec.seed = f.seed;
  spec.sample_rate_hz = f.sample_rate_hz;
  try {
    spec.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  CorpusManifest manifest;
  if (f.backgrounds.empty()) {
    manifest = GenerateCorpus(spec, f.out_dir);
  } else {
    const std::vector<std::filesystem::path> bg(f.backgrounds.begin(), f.backgrounds.end());
    const std::vector<std::filesystem::path> ev(f.events.begin(), f.events.end());
    manifest = GenerateCorpusFromPools(spec, bg, ev, f.out_dir);
  }
  const auto manifest_path = std::filesystem::path(f.out_dir) / "manifest.jsonl";
  if (!quiet) {
    err << "wrote " << manifest.records.size() << " mixtures to " << f.out_dir << "\n";
  }
  out << manifest_path.string() << "\n";
}

// -------------------------------------------------------------------- detect

struct DetectFlags {
  std::string input;
  std::string out;
  DetectorFlags detector;
};

void RunDetect(const DetectFlags& f, bool quiet, std::ostream& out,
               std::ostream& err) {
  const DetectorConfig config = BuildConfig(f.detector, VariantOrThrow(f.detector.variant));
  WavReader reader(f.input);
  Sink sink(f.out, out);
  Detector detector(config);
  std::vector<double> chunk(kStreamChunk);
  std::size_t count = 0;
  auto emit = [&](const std::vector<DetectionEvent>& events) {
    for (const auto& e : events) {
      sink.get() << EventToJsonLine(e, reader.sample_rate_hz()) << "\n";
    }
    count += events.size();
  };
  for (std::size_t n = reader.Read(chunk); n > 0; n = reader.Read(chunk)) {
    emit(detector.Push(std::span<const double>(chunk.data(), n), reader.sample_rate_hz()));
  }
  emit(detector.Flush());
  if (!sink.get()) throw IoError("write failed");
  if (!quiet) {
    err << count << " event(s) in " << detector.samples_consumed() << " samples\n";
  }
}

// ------------------------------------------------------------------ eval-det

struct EvalDetFlags {
  std::string manifest;
  std::vector<double> k_grid;
  double tolerance_s = 0.050;
  std::string out;
  bool by_ebr = false;
  int threads = 1;
  DetectorFlags detector;
};

// Warns (never fails) when a curve breaks the expected DET shape.
void CheckMonotone(const std::vector<DetPoint>& points, std::ostream& err) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    const DetPoint& a = points[i - 1];
    const DetPoint& b = points[i];
    if (a.ebr_db != b.ebr_db) continue;
    if (b.md_rate < a.md_rate || b.fp_per_clip > a.fp_per_clip) {
      err << "warning: DET curve not monotone between k=" << a.threshold_k
          << " and k=" << b.threshold_k << "\n";
    }
  }
}

void RunEvalDet(const EvalDetFlags& f, bool quiet, std::ostream& out,
                std::ostream& err) {
  const DetectorConfig config = BuildConfig(f.detector, VariantOrThrow(f.detector.variant));
  if (f.tolerance_s < 0.0) throw UsageError("--tolerance must be >= 0");
  if (f.threads < 1) throw UsageError("--threads must be >= 1");
  const std::vector<double> grid = f.k_grid.empty() ? DefaultKGrid() : f.k_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw UsageError("--k-grid must be positive and strictly ascending");
    }
  }
  const std::filesystem::path manifest_path(f.manifest);
  const CorpusManifest manifest = ReadManifest(manifest_path);
  if (manifest.records.empty()) throw FormatError(f.manifest + ": no records");

  SweepOptions options;
  options.tolerance_samples = std::llround(f.tolerance_s * manifest.sample_rate_hz);
  options.threads = f.threads;
  options.by_ebr = f.by_ebr;
  if (!quiet) {
    err << "sweeping " << grid.size() << " thresholds over "
        << manifest.records.size() << " clips (" << VariantName(config.variant) << ")\n";
  }
  const SweepResult result =
      RunDetSweep(config, manifest, manifest_path.parent_path(), grid, options);
  CheckMonotone(result.points, err);
  if (f.out.empty()) {
    WriteDetCsv(result.points, out);
  } else {
    ExportDetCsv(result.points, f.out);
  }
}

// --------------------------------------------------------------------- bench

struct BenchFlags {
  std::string clip;
  bool all = false;
  int repetitions = 5;
  DetectorFlags detector;
};

void RunBench(const BenchFlags& f, bool quiet, std::ostream& out,
              std::ostream& err) {
  if (f.repetitions < 3) throw UsageError("--repetitions must be >= 3");
  std::vector<Variant> variants;
  if (f.all) {
    if (f.detector.lambda) throw UsageError("--lambda cannot be combined with --all");
    variants = {Variant::kEnergy, Variant::kLpc, Variant::kWlp};
  } else {
    variants = {VariantOrThrow(f.detector.variant)};
  }
  std::vector<DetectorConfig> configs;
  for (Variant v : variants) configs.push_back(BuildConfig(f.detector, v));

  const SampleBuffer clip = ReadWav(f.clip);
  std::vector<BenchReport> reports;
  for (const auto& config : configs) {
    if (!quiet) err << "benchmarking " << VariantName(config.variant) << "\n";
    reports.push_back(Benchmark(config, clip, f.repetitions));
    out << BenchReportToJsonLine(reports.back()) << "\n";
  }
  if (reports.size() == 3) {
    const double energy = reports[0].wall_time_s;
    const double lpc = reports[1].wall_time_s;
    const double wlp = reports[2].wall_time_s;
    if (!(energy < wlp && wlp < lpc)) {
      err << "warning: wall-time ordering energy < wlp < lpc not observed "
          << "(energy " << energy << " s, wlp " << wlp << " s, lpc " << lpc << " s)\n";
    }
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Impulsive sound detection: corpora, detectors, DET sweeps, benchmarks",
               "impulse"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with flag values; flags override it");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress messages");

  GenCorpusFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "generate a synthetic or pooled corpus");
  gen_cmd->add_option("--count", gen.count, "number of mixtures")->capture_default_str();
  gen_cmd->add_option("--clip-len", gen.clip_len_s, "clip length in seconds")
      ->capture_default_str();
  gen_cmd->add_option("--ebr", gen.ebr, "EBR levels in dB, comma separated")
      ->delimiter(',')
      ->allow_extra_args(false)
      ->capture_default_str();
  gen_cmd->add_option("--event-kind", gen.event_kind, "gunshot or glassbreak")
      ->check(CLI::IsMember({"gunshot", "glassbreak"}))
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--sample-rate", gen.sample_rate_hz, "sample rate in Hz")
      ->capture_default_str();
  gen_cmd->add_option("--backgrounds", gen.backgrounds, "background WAVs (pooled mode)")
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--events", gen.events, "event WAVs (pooled mode)")
      ->delimiter(',')
      ->check(CLI::ExistingFile);

  DetectFlags det;
  auto* det_cmd = app.add_subcommand("detect", "run a detector over a WAV file");
  det_cmd->add_option("input,--input", det.input, "WAV file")->required();
  det_cmd->add_option("--out", det.out, "JSON-lines output path (default stdout)");
  AddDetectorFlags(*det_cmd, det.detector, true);

  EvalDetFlags eval;
  auto* eval_cmd = app.add_subcommand("eval-det", "sweep k over a corpus and write a DET CSV");
  eval_cmd->add_option("--manifest", eval.manifest, "manifest.jsonl")->required();
  eval_cmd->add_option("--k-grid", eval.k_grid, "ascending k values, comma separated")
      ->delimiter(',');
  eval_cmd->add_option("--tolerance", eval.tolerance_s, "onset tolerance in seconds")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "CSV output path (default stdout)");
  eval_cmd->add_flag("--by-ebr", eval.by_ebr, "one curve per EBR level");
  eval_cmd->add_option("--threads", eval.threads, "worker threads")->capture_default_str();
  AddDetectorFlags(*eval_cmd, eval.detector, true);

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "time detectors on one clip");
  bench_cmd->add_option("--clip", bench.clip, "WAV file")->required();
  auto* all_opt = bench_cmd->add_flag("--all", bench.all, "energy, lpc and wlp");
  AddDetectorFlags(*bench_cmd, bench.detector, true);
  bench_cmd->get_option("--variant")->excludes(all_opt);
  bench_cmd->add_option("--repetitions", bench.repetitions, "timed passes (>= 3)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (*gen_cmd) RunGenCorpus(gen, quiet, out, err);
    if (*det_cmd) RunDetect(det, quiet, out, err);
    if (*eval_cmd) RunEvalDet(eval, quiet, out, err);
    if (*bench_cmd) RunBench(bench, quiet, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace impulse::cli

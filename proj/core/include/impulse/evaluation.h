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

// Scoring against ground truth, DET sweeps and wall-clock benchmarks.

#ifndef IMPULSE_EVALUATION_H_
#define IMPULSE_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "impulse/corpus.h"
#include "impulse/detector.h"
#include "impulse/sample_buffer.h"

namespace impulse {

struct ClipScore {
  int true_positives = 0;
  int miss_detections = 0;
  int false_positives = 0;

  friend bool operator==(const ClipScore&, const ClipScore&) = default;
};

struct MatchResult {
  std::int64_t true_positives = 0;
  std::int64_t miss_detections = 0;
  std::int64_t false_positives = 0;
  std::vector<ClipScore> per_clip;

  void Add(const ClipScore& s);
  std::int64_t truth_events() const { return true_positives + miss_detections; }
};

// The truth event is a TP if any detection overlaps
// [onset - tol, onset + event_len + tol] (inclusive); otherwise one MD. Every
// detection outside that span is one FP. Throws ContractError if the
// detections are not sorted by onset.
ClipScore ScoreClip(std::span<const DetectionEvent> detections,
                    const MixtureRecord& truth, std::int64_t tolerance_samples);

struct DetPoint {
  double threshold_k = 0.0;
  double md_rate = 0.0;
  double fp_per_clip = 0.0;
  std::optional<double> ebr_db;  // unset for a pooled sweep
  Variant variant = Variant::kEnergy;

  friend bool operator==(const DetPoint&, const DetPoint&) = default;
};

// 50 ms at the given rate.
std::int64_t DefaultToleranceSamples(int sample_rate_hz);

// n log-spaced values from lo to hi inclusive.
std::vector<double> LogGrid(double lo, double hi, int n);
std::vector<double> DefaultKGrid();

struct EvalClip {
  SampleBuffer mixture;
  MixtureRecord truth;
};

using ClipLoader = std::function<EvalClip(std::size_t index)>;

struct SweepOptions {
  std::int64_t tolerance_samples = 2205;
  // Worker threads; results do not depend on this.
  int threads = 1;
  // Emit one curve per distinct EBR level (ascending) instead of the pooled
  // curve.
  bool by_ebr = false;
  std::size_t chunk_len = 8192;
};

struct SweepResult {
  std::vector<DetPoint> points;
  // per_k[i] holds the pooled counts for k_grid[i], per_clip in clip order,
  // regardless of by_ebr.
  std::vector<MatchResult> per_k;
};

// Runs a fresh detector per (clip, k) and aggregates in clip order. The grid
// must be non-empty and strictly ascending.
SweepResult RunDetSweep(const DetectorConfig& base, std::size_t clip_count,
                        const ClipLoader& load, std::span<const double> k_grid,
                        const SweepOptions& options);

// Sweep over a manifest's mixtures (MixturePath(manifest_dir, index)).
// A missing or unreadable clip raises IoError naming the record index.
SweepResult RunDetSweep(const DetectorConfig& base,
                        const CorpusManifest& manifest,
                        const std::filesystem::path& manifest_dir,
                        std::span<const double> k_grid,
                        const SweepOptions& options);

struct BenchReport {
  Variant variant = Variant::kEnergy;
  double clip_duration_s = 0.0;
  double wall_time_s = 0.0;
  double real_time_factor = 0.0;
  double samples_per_second = 0.0;
  // Events of the last repetition (every repetition produces the same list).
  std::vector<DetectionEvent> events;
};

// Median wall time of `repetitions` full push + flush passes.
// Throws InvalidArgument for fewer than 3 repetitions or an empty clip.
BenchReport Benchmark(const DetectorConfig& config, const SampleBuffer& clip,
                      int repetitions, std::size_t chunk_len = 8192);

std::string BenchReportToJsonLine(const BenchReport& report);

inline constexpr char kDetCsvHeader[] = "threshold_k,md_rate,fp_per_clip,ebr_db,variant";

// Header plus one row per point; `ebr_db` is empty for pooled points.
void WriteDetCsv(std::span<const DetPoint> points, std::ostream& out);
// Throws InvalidArgument for an empty list, IoError if unwritable.
void ExportDetCsv(std::span<const DetPoint> points,
                  const std::filesystem::path& path);
std::vector<DetPoint> ParseDetCsv(const std::filesystem::path& path);

}  // namespace impulse

#endif  // IMPULSE_EVALUATION_H_

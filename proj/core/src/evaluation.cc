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

#include "impulse/evaluation.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "impulse/errors.h"
#include "impulse/wav.h"
#include "json.hpp"

namespace impulse {

void MatchResult::Add(const ClipScore& s) {
  true_positives += s.true_positives;
  miss_detections += s.miss_detections;
  false_positives += s.false_positives;
  per_clip.push_back(s);
}

ClipScore ScoreClip(std::span<const DetectionEvent> detections,
                    const MixtureRecord& truth, std::int64_t tolerance_samples) {
  if (tolerance_samples < 0) throw InvalidArgument("tolerance must be >= 0");
  for (std::size_t i = 1; i < detections.size(); ++i) {
    if (detections[i].onset_sample < detections[i - 1].onset_sample) {
      throw ContractError("detections are not sorted by onset (index " +
                          std::to_string(i) + ")");
    }
  }
  const std::int64_t lo = truth.onset_sample - tolerance_samples;
  const std::int64_t hi =
      truth.onset_sample + truth.event_len_samples + tolerance_samples;
  ClipScore score;
  bool hit = false;
  for (const auto& d : detections) {
    if (d.onset_sample <= hi && d.offset_sample >= lo) {
      hit = true;
    } else {
      ++score.false_positives;
    }
  }
  score.true_positives = hit ? 1 : 0;
  score.miss_detections = hit ? 0 : 1;
  return score;
}

std::int64_t DefaultToleranceSamples(int sample_rate_hz) {
  return std::llround(0.050 * sample_rate_hz);
}

std::vector<double> LogGrid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw InvalidArgument("log grid needs n >= 1 and 0 < lo <= hi");
  }
  if (n == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) grid[i] = lo * std::exp(step * i);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

// Lower end sits above the k range where almost every observation is flagged
// and events fuse, which would make the false-positive count fall with k.
std::vector<double> DefaultKGrid() { return LogGrid(3.0, 300.0, 20); }

namespace {

void CheckGrid(std::span<const double> k_grid) {
  if (k_grid.empty()) throw InvalidArgument("k grid is empty");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > 0.0) || !std::isfinite(k_grid[i])) {
      throw InvalidArgument("k grid values must be positive and finite");
    }
    if (i > 0 && !(k_grid[i] > k_grid[i - 1])) {
      throw InvalidArgument("k grid must be strictly ascending");
    }
  }
}

DetPoint MakePoint(double k, std::int64_t md, std::int64_t truth,
                   std::int64_t fp, std::size_t clips, Variant variant,
                   std::optional<double> ebr) {
  DetPoint p;
  p.threshold_k = k;
  p.md_rate = truth > 0 ? static_cast<double>(md) / static_cast<double>(truth) : 0.0;
  p.fp_per_clip = clips > 0 ? static_cast<double>(fp) / static_cast<double>(clips) : 0.0;
  p.ebr_db = ebr;
  p.variant = variant;
  return p;
}

}  // namespace

SweepResult RunDetSweep(const DetectorConfig& base, std::size_t clip_count,
                        const ClipLoader& load, std::span<const double> k_grid,
                        const SweepOptions& options) {
  CheckGrid(k_grid);
  base.Validate();
  if (clip_count == 0) throw InvalidArgument("sweep over an empty corpus");

  // scores[clip][k]; each worker owns whole clips so nothing is shared.
  std::vector<std::vector<ClipScore>> scores(clip_count);
  std::vector<double> clip_ebr(clip_count, 0.0);
  std::vector<std::exception_ptr> errors(clip_count);

  auto evaluate = [&](std::size_t c) {
    try {
      const EvalClip clip = load(c);
      clip_ebr[c] = clip.truth.ebr_db;
      scores[c].reserve(k_grid.size());
      DetectorConfig config = base;
      for (double k : k_grid) {
        config.threshold_k = k;
        const auto events = DetectAll(config, clip.mixture.samples(),
                                      clip.mixture.sample_rate_hz(), options.chunk_len);
        scores[c].push_back(ScoreClip(events, clip.truth, options.tolerance_samples));
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads,
                                                static_cast<int>(clip_count)));
  if (threads == 1) {
    for (std::size_t c = 0; c < clip_count; ++c) evaluate(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < clip_count; c = next++) evaluate(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  result.per_k.resize(k_grid.size());
  for (std::size_t c = 0; c < clip_count; ++c) {
    for (std::size_t i = 0; i < k_grid.size(); ++i) result.per_k[i].Add(scores[c][i]);
  }

  if (!options.by_ebr) {
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
      const auto& m = result.per_k[i];
      result.points.push_back(MakePoint(k_grid[i], m.miss_detections, m.truth_events(),
                                        m.false_positives, clip_count, base.variant,
                                        std::nullopt));
    }
    return result;
  }

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t c = 0; c < clip_count; ++c) groups[clip_ebr[c]].push_back(c);
  for (const auto& [ebr, clips] : groups) {
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
      std::int64_t md = 0, truth = 0, fp = 0;
      for (std::size_t c : clips) {
        const ClipScore& s = scores[c][i];
        md += s.miss_detections;
        truth += s.miss_detections + s.true_positives;
        fp += s.false_positives;
      }
      result.points.push_back(
          MakePoint(k_grid[i], md, truth, fp, clips.size(), base.variant, ebr));
    }
  }
  return result;
}

SweepResult RunDetSweep(const DetectorConfig& base,
                        const CorpusManifest& manifest,
                        const std::filesystem::path& manifest_dir,
                        std::span<const double> k_grid,
                        const SweepOptions& options) {
  auto load = [&](std::size_t c) -> EvalClip {
    const MixtureRecord& record = manifest.records[c];
    const auto path = MixturePath(manifest_dir, record.index);
    try {
      SampleBuffer mixture = ReadWav(path);
      if (static_cast<std::int64_t>(mixture.size()) != record.clip_len_samples) {
        throw FormatError("length " + std::to_string(mixture.size()) +
                          " does not match clip_len_samples");
      }
      return {std::move(mixture), record};
    } catch (const std::exception& e) {
      throw IoError("record " + std::to_string(record.index) + " (" + path.string() +
                    "): " + e.what());
    }
  };
  return RunDetSweep(base, manifest.records.size(), load, k_grid, options);
}

BenchReport Benchmark(const DetectorConfig& config, const SampleBuffer& clip,
                      int repetitions, std::size_t chunk_len) {
  if (repetitions < 3) throw InvalidArgument("benchmark needs >= 3 repetitions");
  if (clip.empty()) throw InvalidArgument("benchmark clip is empty");
  std::vector<double> times;
  BenchReport report;
  for (int r = 0; r < repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    auto events = DetectAll(config, clip.samples(), clip.sample_rate_hz(), chunk_len);
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(stop - start).count());
    report.events = std::move(events);
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  const double median =
      n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  report.variant = config.variant;
  report.clip_duration_s = clip.duration_seconds();
  report.wall_time_s = median;
  report.real_time_factor = median / report.clip_duration_s;
  report.samples_per_second = static_cast<double>(clip.size()) / median;
  return report;
}

std::string BenchReportToJsonLine(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["variant"] = std::string(VariantName(report.variant));
  j["clip_duration_s"] = report.clip_duration_s;
  j["wall_time_s"] = report.wall_time_s;
  j["real_time_factor"] = report.real_time_factor;
  j["samples_per_second"] = report.samples_per_second;
  return j.dump();
}

namespace {

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void WriteDetCsv(std::span<const DetPoint> points, std::ostream& out) {
  out << kDetCsvHeader << "\n";
  for (const auto& p : points) {
    out << FormatDouble(p.threshold_k) << ',' << FormatDouble(p.md_rate) << ','
        << FormatDouble(p.fp_per_clip) << ','
        << (p.ebr_db ? FormatDouble(*p.ebr_db) : std::string()) << ','
        << VariantName(p.variant) << "\n";
  }
}

void ExportDetCsv(std::span<const DetPoint> points,
                  const std::filesystem::path& path) {
  if (points.empty()) throw InvalidArgument("no DET points to export");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  WriteDetCsv(points, out);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<DetPoint> ParseDetCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kDetCsvHeader) {
    throw FormatError(path.string() + ": missing DET CSV header");
  }
  std::vector<DetPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw FormatError(path.string() + ": bad row: " + line);
    DetPoint p;
    try {
      p.threshold_k = std::stod(fields[0]);
      p.md_rate = std::stod(fields[1]);
      p.fp_per_clip = std::stod(fields[2]);
      if (!fields[3].empty()) p.ebr_db = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad number in row: " + line);
    }
    const auto variant = ParseVariant(fields[4]);
    if (!variant) throw FormatError(path.string() + ": unknown variant " + fields[4]);
    p.variant = *variant;
    points.push_back(p);
  }
  return points;
}

}  // namespace impulse

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

// Evaluation corpora: event-to-background-ratio (EBR) controlled mixing with
// exact ground truth, a deterministic synthetic generator, and the
// line-delimited JSON manifest that ties mixtures to their sources.
//
// On-disk layout written by GenerateCorpus():
//
//   <dir>/manifest.jsonl          one MixtureRecord per line
//   <dir>/corpus.json             generator parameters (seed, kind, ...)
//   <dir>/backgrounds/bg_NNNN.wav
//   <dir>/events/ev_NNNN.wav
//   <dir>/mixtures/mix_NNNN.wav   see MixturePath()
//
// Paths inside the manifest are relative to the manifest's directory.

#ifndef IMPULSE_CORPUS_H_
#define IMPULSE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "impulse/sample_buffer.h"

namespace impulse {

struct MixtureRecord {
  std::int64_t index = 0;
  std::string background_path;
  std::string event_path;
  std::int64_t onset_sample = 0;
  std::int64_t event_len_samples = 0;
  double ebr_db = 0.0;
  double applied_gain = 1.0;
  std::int64_t clip_len_samples = 0;
  int sample_rate_hz = kDefaultSampleRateHz;
  // Factor the whole mixture was scaled by to stay inside [-1, 1].
  double normalization = 1.0;

  // Throws InvalidArgument when the span or gain invariants fail.
  void Validate() const;

  friend bool operator==(const MixtureRecord&, const MixtureRecord&) = default;
};

struct CorpusManifest {
  std::vector<MixtureRecord> records;
  int sample_rate_hz = kDefaultSampleRateHz;
  std::uint64_t seed = 0;
};

// sqrt(mean(x^2)). Throws InvalidArgument on empty input.
double SegmentRms(std::span<const double> x);

// 20 log10(rms(gain * event) / rms(background segment under the event)).
double MeasureEbrDb(std::span<const double> background,
                    std::span<const double> event, double gain,
                    std::int64_t onset_sample);

struct MixResult {
  SampleBuffer mixture;
  MixtureRecord record;
};

// Adds `event` into `background` starting at `onset_sample`, scaled so that
// the event-to-background RMS ratio over the event span equals ebr_db.
// The mixture is not normalized. Throws InvalidArgument on span overflow or a
// rate mismatch, DegenerateMixError if either RMS is zero.
MixResult MixAtEbr(const SampleBuffer& background, const SampleBuffer& event,
                   double ebr_db, std::int64_t onset_sample);

// Scales x by 1/peak if its peak magnitude exceeds 1. Returns the factor
// applied (1.0 if untouched).
double NormalizePeak(std::vector<double>& x);

enum class EventKind { kGunshot, kGlassbreak };

std::string_view EventKindName(EventKind kind);
std::optional<EventKind> ParseEventKind(std::string_view name);

// Synthetic generator parameters. The event templates and the colored-noise
// background are stand-ins for recorded material.
struct CorpusSpec {
  int count = 50;
  double clip_len_s = 30.0;
  std::vector<double> ebr_levels = {-6.0, 0.0, 6.0};
  EventKind event_kind = EventKind::kGunshot;
  std::uint64_t seed = 0;
  int sample_rate_hz = kDefaultSampleRateHz;
  double background_rms = 0.05;
  double background_pole = 0.95;

  // Throws ConfigError naming the violated field.
  void Validate() const;
};

// Background noise: first-order low-pass (pole `pole`) white noise scaled to
// `rms`. Samples are float-representable.
std::vector<double> SynthesizeBackground(std::size_t length, double pole,
                                         double rms, std::uint64_t seed);
// Unit-peak-ish event template; float-representable samples.
std::vector<double> SynthesizeEvent(EventKind kind, int sample_rate_hz,
                                    std::uint64_t seed);

struct SynthesizedClip {
  SampleBuffer background;
  SampleBuffer event;
  SampleBuffer mixture;  // normalized, float-representable
  MixtureRecord record;
};

// Deterministic in (spec, index); clips are independent of each other so they
// can be built in any order or in parallel. Record paths use the on-disk
// layout above.
SynthesizedClip SynthesizeClip(const CorpusSpec& spec, int index);

// Writes every clip plus manifest.jsonl and corpus.json into `out_dir`.
CorpusManifest GenerateCorpus(const CorpusSpec& spec,
                              const std::filesystem::path& out_dir);

// Mixes user-supplied material instead of synthetic templates: clip i uses
// background i % backgrounds.size() and an event drawn from `events`. The
// clip length is the background's length. spec.count, ebr_levels, seed apply.
CorpusManifest GenerateCorpusFromPools(
    const CorpusSpec& spec, std::span<const std::filesystem::path> backgrounds,
    std::span<const std::filesystem::path> events,
    const std::filesystem::path& out_dir);

std::filesystem::path MixturePath(const std::filesystem::path& corpus_dir,
                                  std::int64_t index);

void WriteManifest(const std::filesystem::path& path,
                   const CorpusManifest& manifest);
// Throws FormatError on a malformed line, IoError if unreadable.
CorpusManifest ReadManifest(const std::filesystem::path& path);

std::string RecordToJsonLine(const MixtureRecord& record);
MixtureRecord RecordFromJsonLine(std::string_view line);

}  // namespace impulse

#endif  // IMPULSE_CORPUS_H_

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

#include "impulse/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "impulse/errors.h"
#include "impulse/wav.h"
#include "json.hpp"

namespace impulse {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr char kManifestName[] = "manifest.jsonl";
constexpr char kCorpusInfoName[] = "corpus.json";

// Independent generator per (seed, clip, purpose).
std::mt19937_64 MakeRng(std::uint64_t seed, std::uint64_t index,
                        std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void RoundToFloat(std::vector<double>& x) {
  for (double& v : x) v = static_cast<double>(static_cast<float>(v));
}

std::string NumberedName(const char* prefix, std::int64_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "%s_%04lld.wav", prefix,
                static_cast<long long>(index));
  return name;
}

std::int64_t SecondsToSamples(double seconds, int rate) {
  return static_cast<std::int64_t>(std::llround(seconds * rate));
}

}  // namespace

void MixtureRecord::Validate() const {
  if (onset_sample < 0 || event_len_samples <= 0 || clip_len_samples <= 0 ||
      onset_sample + event_len_samples > clip_len_samples) {
    throw InvalidArgument("record " + std::to_string(index) +
                          ": event span does not fit in the clip");
  }
  if (!(applied_gain > 0.0) || !std::isfinite(applied_gain)) {
    throw InvalidArgument("record " + std::to_string(index) +
                          ": applied_gain must be positive and finite");
  }
  if (sample_rate_hz <= 0) {
    throw InvalidArgument("record " + std::to_string(index) +
                          ": sample rate must be positive");
  }
}

double SegmentRms(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("RMS of an empty segment");
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum / static_cast<double>(x.size()));
}

double MeasureEbrDb(std::span<const double> background,
                    std::span<const double> event, double gain,
                    std::int64_t onset_sample) {
  if (onset_sample < 0 ||
      static_cast<std::size_t>(onset_sample) + event.size() > background.size()) {
    throw InvalidArgument("event span exceeds the background");
  }
  std::vector<double> scaled(event.begin(), event.end());
  for (double& v : scaled) v *= gain;
  const double event_rms = SegmentRms(scaled);
  const double bg_rms = SegmentRms(background.subspan(
      static_cast<std::size_t>(onset_sample), event.size()));
  return 20.0 * std::log10(event_rms / bg_rms);
}

MixResult MixAtEbr(const SampleBuffer& background, const SampleBuffer& event,
                   double ebr_db, std::int64_t onset_sample) {
  if (background.sample_rate_hz() != event.sample_rate_hz()) {
    throw InvalidArgument("background and event sample rates differ");
  }
  if (!std::isfinite(ebr_db)) throw InvalidArgument("EBR must be finite");
  if (event.empty()) throw InvalidArgument("empty event");
  if (onset_sample < 0 ||
      static_cast<std::size_t>(onset_sample) + event.size() > background.size()) {
    throw InvalidArgument("event of " + std::to_string(event.size()) +
                          " samples at onset " + std::to_string(onset_sample) +
                          " overflows a background of " +
                          std::to_string(background.size()) + " samples");
  }
  const auto bg = background.samples();
  const auto ev = event.samples();
  const double bg_rms =
      SegmentRms(bg.subspan(static_cast<std::size_t>(onset_sample), ev.size()));
  const double ev_rms = SegmentRms(ev);
  if (bg_rms == 0.0) throw DegenerateMixError("background segment has zero RMS");
  if (ev_rms == 0.0) throw DegenerateMixError("event has zero RMS");

  const double gain = std::pow(10.0, ebr_db / 20.0) * bg_rms / ev_rms;
  std::vector<double> mixed(bg.begin(), bg.end());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    mixed[static_cast<std::size_t>(onset_sample) + i] += gain * ev[i];
  }

  MixtureRecord record;
  record.onset_sample = onset_sample;
  record.event_len_samples = static_cast<std::int64_t>(ev.size());
  record.ebr_db = ebr_db;
  record.applied_gain = gain;
  record.clip_len_samples = static_cast<std::int64_t>(bg.size());
  record.sample_rate_hz = background.sample_rate_hz();
  return {SampleBuffer(std::move(mixed), background.sample_rate_hz()), record};
}

double NormalizePeak(std::vector<double>& x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  if (peak <= 1.0) return 1.0;
  const double factor = 1.0 / peak;
  for (double& v : x) v *= factor;
  return factor;
}

std::string_view EventKindName(EventKind kind) {
  return kind == EventKind::kGunshot ? "gunshot" : "glassbreak";
}

std::optional<EventKind> ParseEventKind(std::string_view name) {
  if (name == "gunshot") return EventKind::kGunshot;
  if (name == "glassbreak") return EventKind::kGlassbreak;
  return std::nullopt;
}

void CorpusSpec::Validate() const {
  if (count < 1) throw ConfigError("count", "count must be >= 1");
  if (!(clip_len_s > 4.0) || !std::isfinite(clip_len_s)) {
    throw ConfigError("clip_len_s",
                      "clip length must exceed 4 s (onsets fall in [2 s, len - 2 s])");
  }
  if (ebr_levels.empty()) throw ConfigError("ebr_levels", "no EBR levels given");
  for (double e : ebr_levels) {
    if (!std::isfinite(e)) throw ConfigError("ebr_levels", "EBR levels must be finite");
  }
  if (sample_rate_hz < 8000) {
    throw ConfigError("sample_rate_hz", "sample rate must be >= 8000 Hz");
  }
  if (!(background_rms > 0.0)) {
    throw ConfigError("background_rms", "background RMS must be positive");
  }
  if (!(std::fabs(background_pole) < 1.0)) {
    throw ConfigError("background_pole", "background pole must be inside (-1, 1)");
  }
}

std::vector<double> SynthesizeBackground(std::size_t length, double pole,
                                         double rms, std::uint64_t seed) {
  if (length == 0) throw InvalidArgument("background length must be positive");
  auto rng = MakeRng(seed, 0, 0);
  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<double> x(length);
  // Start in the stationary distribution of the AR(1) process.
  double state = white(rng) / std::sqrt(1.0 - pole * pole);
  for (double& v : x) {
    state = pole * state + white(rng);
    v = state;
  }
  const double scale = rms / SegmentRms(x);
  for (double& v : x) v *= scale;
  RoundToFloat(x);
  return x;
}

std::vector<double> SynthesizeEvent(EventKind kind, int sample_rate_hz,
                                    std::uint64_t seed) {
  auto rng = MakeRng(seed, 0, 1);
  std::normal_distribution<double> white(0.0, 1.0);
  const double fs = sample_rate_hz;
  std::vector<double> x;
  if (kind == EventKind::kGunshot) {
    // 5 ms linear noise attack, then 80 ms of exponential decay (tau 25 ms).
    const auto attack = SecondsToSamples(0.005, sample_rate_hz);
    const auto decay = SecondsToSamples(0.080, sample_rate_hz);
    const double tau = 0.025 * fs;
    x.resize(static_cast<std::size_t>(attack + decay));
    for (std::int64_t n = 0; n < attack + decay; ++n) {
      const double env = n < attack ? static_cast<double>(n + 1) / attack
                                    : std::exp(-static_cast<double>(n - attack) / tau);
      x[n] = env * white(rng);
    }
  } else {
    // Three decaying partials in 3-8 kHz (tau 15 ms) plus a 2 ms click.
    const auto length = SecondsToSamples(0.100, sample_rate_hz);
    const auto click = SecondsToSamples(0.002, sample_rate_hz);
    const double tau = 0.015 * fs;
    const double f_hi = std::min(8000.0, 0.45 * fs);
    std::uniform_real_distribution<double> freq(std::min(3000.0, 0.3 * fs), f_hi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    x.assign(static_cast<std::size_t>(length), 0.0);
    for (int p = 0; p < 3; ++p) {
      const double w = 2.0 * std::numbers::pi * freq(rng) / fs;
      const double ph = phase(rng);
      const double a = amp(rng);
      for (std::int64_t n = 0; n < length; ++n) {
        x[n] += a * std::exp(-n / tau) * std::sin(w * n + ph);
      }
    }
    for (std::int64_t n = 0; n < click; ++n) x[n] += white(rng);
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
  RoundToFloat(x);
  return x;
}

SynthesizedClip SynthesizeClip(const CorpusSpec& spec, int index) {
  spec.Validate();
  if (index < 0) throw InvalidArgument("clip index must be nonnegative");
  const int rate = spec.sample_rate_hz;
  const auto length = SecondsToSamples(spec.clip_len_s, rate);
  const auto idx = static_cast<std::uint64_t>(index);

  const std::uint64_t bg_seed = MakeRng(spec.seed, idx, 10)();
  const std::uint64_t ev_seed = MakeRng(spec.seed, idx, 11)();
  auto onset_rng = MakeRng(spec.seed, idx, 12);

  SampleBuffer background(
      SynthesizeBackground(static_cast<std::size_t>(length), spec.background_pole,
                           spec.background_rms, bg_seed),
      rate);
  SampleBuffer event(SynthesizeEvent(spec.event_kind, rate, ev_seed), rate);

  const std::int64_t lo = 2 * static_cast<std::int64_t>(rate);
  const std::int64_t hi = std::min(length - 2 * static_cast<std::int64_t>(rate),
                                   length - static_cast<std::int64_t>(event.size()));
  const std::int64_t onset =
      std::uniform_int_distribution<std::int64_t>(lo, hi)(onset_rng);
  const double ebr = spec.ebr_levels[static_cast<std::size_t>(index) %
                                     spec.ebr_levels.size()];

  MixResult mix = MixAtEbr(background, event, ebr, onset);
  std::vector<double> mixed = std::move(mix.mixture).Release();
  const double normalization = NormalizePeak(mixed);
  RoundToFloat(mixed);

  MixtureRecord record = mix.record;
  record.index = index;
  record.background_path = (fs::path("backgrounds") / NumberedName("bg", index)).generic_string();
  record.event_path = (fs::path("events") / NumberedName("ev", index)).generic_string();
  record.normalization = normalization;
  return {std::move(background), std::move(event),
          SampleBuffer(std::move(mixed), rate), record};
}

fs::path MixturePath(const fs::path& corpus_dir, std::int64_t index) {
  return corpus_dir / "mixtures" / NumberedName("mix", index);
}

namespace {

void PrepareDirs(const fs::path& out_dir) {
  std::error_code ec;
  for (const char* sub : {"backgrounds", "events", "mixtures"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
}

void WriteCorpusInfo(const fs::path& out_dir, const CorpusSpec& spec,
                     std::string_view source) {
  ordered_json info;
  info["count"] = spec.count;
  info["clip_len_s"] = spec.clip_len_s;
  info["ebr_levels"] = spec.ebr_levels;
  info["event_kind"] = std::string(EventKindName(spec.event_kind));
  info["seed"] = spec.seed;
  info["sample_rate_hz"] = spec.sample_rate_hz;
  info["background_rms"] = spec.background_rms;
  info["background_pole"] = spec.background_pole;
  info["source"] = std::string(source);
  std::ofstream out(out_dir / kCorpusInfoName);
  if (!out) throw IoError("cannot write " + (out_dir / kCorpusInfoName).string());
  out << info.dump(2) << "\n";
}

}  // namespace

CorpusManifest GenerateCorpus(const CorpusSpec& spec, const fs::path& out_dir) {
  spec.Validate();
  PrepareDirs(out_dir);
  CorpusManifest manifest;
  manifest.sample_rate_hz = spec.sample_rate_hz;
  manifest.seed = spec.seed;
  for (int i = 0; i < spec.count; ++i) {
    SynthesizedClip clip = SynthesizeClip(spec, i);
    WriteWav(out_dir / clip.record.background_path, clip.background, WavEncoding::kFloat32);
    WriteWav(out_dir / clip.record.event_path, clip.event, WavEncoding::kFloat32);
    WriteWav(MixturePath(out_dir, i), clip.mixture, WavEncoding::kFloat32);
    manifest.records.push_back(clip.record);
  }
  WriteManifest(out_dir / kManifestName, manifest);
  WriteCorpusInfo(out_dir, spec, "synthetic");
  return manifest;
}

CorpusManifest GenerateCorpusFromPools(const CorpusSpec& spec,
                                       std::span<const fs::path> backgrounds,
                                       std::span<const fs::path> events,
                                       const fs::path& out_dir) {
  if (spec.count < 1) throw ConfigError("count", "count must be >= 1");
  if (spec.ebr_levels.empty()) throw ConfigError("ebr_levels", "no EBR levels given");
  if (backgrounds.empty() || events.empty()) {
    throw ConfigError("pools", "background and event pools must be non-empty");
  }
  PrepareDirs(out_dir);
  CorpusManifest manifest;
  manifest.seed = spec.seed;
  std::optional<int> rate;
  for (int i = 0; i < spec.count; ++i) {
    auto rng = MakeRng(spec.seed, static_cast<std::uint64_t>(i), 20);
    const fs::path& bg_path = backgrounds[static_cast<std::size_t>(i) % backgrounds.size()];
    const fs::path& ev_path =
        events[std::uniform_int_distribution<std::size_t>(0, events.size() - 1)(rng)];
    SampleBuffer background = ReadWav(bg_path);
    SampleBuffer event = ReadWav(ev_path);
    if (rate && *rate != background.sample_rate_hz()) {
      throw InvalidArgument(bg_path.string() + ": sample rate differs from the rest of the pool");
    }
    rate = background.sample_rate_hz();
    const auto len = static_cast<std::int64_t>(background.size());
    const auto ev_len = static_cast<std::int64_t>(event.size());
    if (ev_len > len) {
      throw InvalidArgument(ev_path.string() + " is longer than " + bg_path.string());
    }
    const std::int64_t margin = 2 * static_cast<std::int64_t>(*rate);
    std::int64_t lo = margin;
    std::int64_t hi = len - margin - ev_len;
    if (hi < lo) {
      lo = 0;
      hi = len - ev_len;
    }
    const std::int64_t onset = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    const double ebr = spec.ebr_levels[static_cast<std::size_t>(i) % spec.ebr_levels.size()];
    MixResult mix = MixAtEbr(background, event, ebr, onset);
    std::vector<double> mixed = std::move(mix.mixture).Release();
    MixtureRecord record = mix.record;
    record.index = i;
    record.background_path = fs::absolute(bg_path).generic_string();
    record.event_path = fs::absolute(ev_path).generic_string();
    record.normalization = NormalizePeak(mixed);
    RoundToFloat(mixed);
    WriteWav(MixturePath(out_dir, i), SampleBuffer(std::move(mixed), *rate),
             WavEncoding::kFloat32);
    manifest.records.push_back(record);
  }
  manifest.sample_rate_hz = *rate;
  WriteManifest(out_dir / kManifestName, manifest);
  CorpusSpec info = spec;
  info.sample_rate_hz = *rate;
  WriteCorpusInfo(out_dir, info, "pools");
  return manifest;
}

std::string RecordToJsonLine(const MixtureRecord& r) {
  ordered_json j;
  j["index"] = r.index;
  j["background_path"] = r.background_path;
  j["event_path"] = r.event_path;
  j["onset_sample"] = r.onset_sample;
  j["event_len_samples"] = r.event_len_samples;
  j["ebr_db"] = r.ebr_db;
  j["applied_gain"] = r.applied_gain;
  j["clip_len_samples"] = r.clip_len_samples;
  j["sample_rate_hz"] = r.sample_rate_hz;
  j["normalization"] = r.normalization;
  return j.dump();
}

MixtureRecord RecordFromJsonLine(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    MixtureRecord r;
    r.index = j.at("index").get<std::int64_t>();
    r.background_path = j.at("background_path").get<std::string>();
    r.event_path = j.at("event_path").get<std::string>();
    r.onset_sample = j.at("onset_sample").get<std::int64_t>();
    r.event_len_samples = j.at("event_len_samples").get<std::int64_t>();
    r.ebr_db = j.at("ebr_db").get<double>();
    r.applied_gain = j.at("applied_gain").get<double>();
    r.clip_len_samples = j.at("clip_len_samples").get<std::int64_t>();
    r.sample_rate_hz = j.at("sample_rate_hz").get<int>();
    r.normalization = j.at("normalization").get<double>();
    r.Validate();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad manifest record: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad manifest record: ") + e.what());
  }
}

void WriteManifest(const fs::path& path, const CorpusManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : manifest.records) out << RecordToJsonLine(r) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

CorpusManifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  CorpusManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      manifest.records.push_back(RecordFromJsonLine(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!manifest.records.empty()) {
    manifest.sample_rate_hz = manifest.records.front().sample_rate_hz;
    for (const auto& r : manifest.records) {
      if (r.sample_rate_hz != manifest.sample_rate_hz) {
        throw FormatError(path.string() + ": records disagree on sample rate");
      }
    }
  }
  const fs::path info_path = path.parent_path() / kCorpusInfoName;
  if (std::ifstream info(info_path); info) {
    try {
      const auto j = nlohmann::json::parse(info);
      manifest.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception&) {
      // Seed is informational only.
    }
  }
  return manifest;
}

}  // namespace impulse

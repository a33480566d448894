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

// Streaming impulsive-sound detectors.
//
// Three variants share one push interface:
//
//   energy  Non-overlapping frames of frame_len samples. A frame is impulsive
//           when its energy exceeds mean + k * stddev of the last history_len
//           background frame energies. Consecutive impulsive frames form one
//           event; onsets are frame aligned.
//   lpc     Every block_len samples an order-N predictor is fitted to that
//           block; the inverse filter runs continuously across blocks. Sample
//           n is impulsive when |residual[n]| > k * sigma_e, with sigma_e the
//           MAD-based deviation (MAD * 1.4826) of the trailing history_len
//           background residual samples. Impulsive samples fewer than
//           merge_gap samples apart merge into one event.
//   wlp     As lpc, with unit delays replaced by first-order all-pass
//           sections (warped autocorrelation and warped inverse filter).
//
// Impulsive observations never enter the background statistics. Nothing is
// flagged until the history is full, and nothing is flagged while the
// background deviation is below 1e-12 (digital silence).
//
// Event output depends only on the concatenated sample stream, never on how
// it was split into Push() calls.

#ifndef IMPULSE_DETECTOR_H_
#define IMPULSE_DETECTOR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "impulse/sample_buffer.h"

namespace impulse {

enum class Variant { kEnergy, kLpc, kWlp };

std::string_view VariantName(Variant v);
// Accepts "energy", "lpc", "wlp".
std::optional<Variant> ParseVariant(std::string_view name);

inline constexpr double kSilenceFloor = 1e-12;
inline constexpr double kMadToSigma = 1.4826;

struct DetectorConfig {
  Variant variant = Variant::kEnergy;
  double threshold_k = 5.0;
  int frame_len = 350;
  // Frames for energy, residual samples for lpc/wlp.
  int history_len = 30;
  int order = 5;
  double lambda = -0.7;
  int block_len = 2048;
  int merge_gap = 100;
  // sigma_e is refreshed after this many new background residual samples.
  int stat_hop = 441;

  // Standard defaults for a variant (history_len 30 frames for energy,
  // 4410 residual samples for lpc/wlp).
  static DetectorConfig Defaults(Variant variant);

  // Throws ConfigError naming the first violated field.
  void Validate() const;
};

struct DetectionEvent {
  std::int64_t onset_sample = 0;
  std::int64_t offset_sample = 0;  // inclusive
  double peak_score = 0.0;         // max(statistic / threshold), >= 1
  Variant variant = Variant::kEnergy;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

// Same onset, offset and score, ignoring which variant produced them.
bool SameSpanAndScore(const DetectionEvent& a, const DetectionEvent& b);

class DetectorEngine;

// Single-stream detector state. Not thread-safe; movable between threads.
class Detector {
 public:
  explicit Detector(DetectorConfig config);
  ~Detector();
  Detector(Detector&&) noexcept;
  Detector& operator=(Detector&&) noexcept;

  // Consumes a chunk and returns the events that ended inside it.
  // Throws ContractError on a sample-rate change or a push after Flush().
  std::vector<DetectionEvent> Push(const SampleBuffer& chunk);
  std::vector<DetectionEvent> Push(std::span<const double> chunk,
                                   int sample_rate_hz);

  // Processes buffered samples and closes an open event at the last consumed
  // sample. The detector accepts no more input until Reset().
  std::vector<DetectionEvent> Flush();

  // Back to the freshly constructed state; the config is kept.
  void Reset();

  const DetectorConfig& config() const { return config_; }
  std::int64_t samples_consumed() const { return consumed_; }
  bool in_event() const;
  // Frames (energy) or samples (lpc/wlp) that went through the decision rule.
  std::int64_t decisions_made() const;

 private:
  DetectorConfig config_;
  std::unique_ptr<DetectorEngine> engine_;
  std::int64_t consumed_ = 0;
  std::optional<int> sample_rate_hz_;
  bool flushed_ = false;
};

// Streams `samples` through a fresh detector in chunks of `chunk_len` and
// flushes. Convenience for batch callers.
std::vector<DetectionEvent> DetectAll(const DetectorConfig& config,
                                      std::span<const double> samples,
                                      int sample_rate_hz,
                                      std::size_t chunk_len = 8192);

}  // namespace impulse

#endif  // IMPULSE_DETECTOR_H_

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

#include "impulse/detector.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "impulse/dsp.h"
#include "impulse/errors.h"

namespace impulse {

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kEnergy:
      return "energy";
    case Variant::kLpc:
      return "lpc";
    case Variant::kWlp:
      return "wlp";
  }
  return "unknown";
}

std::optional<Variant> ParseVariant(std::string_view name) {
  if (name == "energy") return Variant::kEnergy;
  if (name == "lpc") return Variant::kLpc;
  if (name == "wlp") return Variant::kWlp;
  return std::nullopt;
}

DetectorConfig DetectorConfig::Defaults(Variant variant) {
  DetectorConfig c;
  c.variant = variant;
  if (variant != Variant::kEnergy) {
    c.history_len = 4410;
    c.threshold_k = 6.0;
  }
  return c;
}

void DetectorConfig::Validate() const {
  if (!(threshold_k > 0.0) || !std::isfinite(threshold_k)) {
    throw ConfigError("threshold_k", "threshold_k must be a positive number");
  }
  if (frame_len < 2) throw ConfigError("frame_len", "frame_len must be >= 2");
  if (history_len < 2) {
    throw ConfigError("history_len", "history_len must be >= 2");
  }
  if (order < 1) throw ConfigError("order", "order must be >= 1");
  if (!(std::fabs(lambda) < 1.0)) {
    throw ConfigError("lambda", "lambda out of range (|lambda| must be < 1)");
  }
  if (block_len <= 4 * order) {
    throw ConfigError("block_len",
                      "block too short for order (block_len must exceed 4 * order)");
  }
  if (merge_gap < 1) throw ConfigError("merge_gap", "merge_gap must be >= 1");
  if (stat_hop < 1 ||
      (variant != Variant::kEnergy && stat_hop > history_len)) {
    throw ConfigError("stat_hop", "stat_hop must be in [1, history_len]");
  }
}

bool SameSpanAndScore(const DetectionEvent& a, const DetectionEvent& b) {
  return a.onset_sample == b.onset_sample &&
         a.offset_sample == b.offset_sample && a.peak_score == b.peak_score;
}

namespace {

// Groups impulsive observations into events. An observation covers the
// inclusive span [start, end]; observations separated by fewer than
// `merge_gap` quiet samples share an event.
class EventTracker {
 public:
  EventTracker(Variant variant, std::int64_t merge_gap)
      : variant_(variant), merge_gap_(merge_gap) {}

  void Impulsive(std::int64_t start, std::int64_t end, double score,
                 std::vector<DetectionEvent>& out) {
    if (open_ && start - last_ - 1 < merge_gap_) {
      last_ = end;
      peak_ = std::max(peak_, score);
      return;
    }
    CloseAt(last_, out);
    open_ = true;
    onset_ = start;
    last_ = end;
    peak_ = score;
  }

  // `end` is the last sample of a quiet observation.
  void Quiet(std::int64_t end, std::vector<DetectionEvent>& out) {
    if (open_ && end - last_ >= merge_gap_) CloseAt(last_, out);
  }

  void CloseAt(std::int64_t offset, std::vector<DetectionEvent>& out) {
    if (!open_) return;
    out.push_back({onset_, offset, peak_, variant_});
    open_ = false;
  }

  bool open() const { return open_; }

 private:
  Variant variant_;
  std::int64_t merge_gap_;
  bool open_ = false;
  std::int64_t onset_ = 0;
  std::int64_t last_ = 0;
  double peak_ = 0.0;
};

// Fixed-capacity FIFO of the most recent background values.
class Ring {
 public:
  explicit Ring(std::size_t capacity) : data_(capacity) {}

  // Returns the evicted value once the ring is full.
  std::optional<double> Push(double v) {
    if (count_ < data_.size()) {
      data_[count_++] = v;
      return std::nullopt;
    }
    const double old = data_[head_];
    data_[head_] = v;
    if (++head_ == data_.size()) head_ = 0;
    return old;
  }

  bool full() const { return count_ == data_.size(); }
  std::size_t size() const { return count_; }
  // Chronological access, 0 = oldest.
  double operator[](std::size_t i) const {
    return data_[(head_ + i) % data_.size()];
  }
  std::span<const double> raw() const { return {data_.data(), count_}; }

 private:
  std::vector<double> data_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

// Trailing background residuals and their robust deviation, recomputed after
// every `hop` insertions once the window is full.
class ResidualStats {
 public:
  ResidualStats(std::size_t capacity, std::size_t hop)
      : ring_(capacity), hop_(hop) {}

  void Add(double v) {
    ring_.Push(v);
    if (!ring_.full()) return;
    if (sigma_ && ++pending_ < hop_) return;
    pending_ = 0;
    sigma_ = kMadToSigma * mad_.Compute(ring_.raw());
  }

  std::optional<double> sigma() const { return sigma_; }

 private:
  Ring ring_;
  std::size_t hop_;
  dsp::SlidingMad mad_;
  std::size_t pending_ = 0;
  std::optional<double> sigma_;
};

}  // namespace

class DetectorEngine {
 public:
  virtual ~DetectorEngine() = default;
  // `first_index` is the stream index of x[0].
  virtual void Consume(std::span<const double> x, std::int64_t first_index,
                       std::vector<DetectionEvent>& out) = 0;
  // Processes whatever partial frame/block is buffered. Does not close events.
  virtual void Drain(std::int64_t first_index,
                     std::vector<DetectionEvent>& out) = 0;
  virtual bool InEvent() const = 0;
  virtual void CloseOpenEvent(std::int64_t offset,
                              std::vector<DetectionEvent>& out) = 0;
  virtual std::int64_t decisions() const = 0;
};

namespace {

class EnergyEngine final : public DetectorEngine {
 public:
  explicit EnergyEngine(const DetectorConfig& c)
      : k_(c.threshold_k),
        frame_len_(static_cast<std::size_t>(c.frame_len)),
        ring_(static_cast<std::size_t>(c.history_len)),
        tracker_(Variant::kEnergy, 1) {
    pending_.reserve(frame_len_);
  }

  void Consume(std::span<const double> x, std::int64_t first_index,
               std::vector<DetectionEvent>& out) override {
    for (std::size_t i = 0; i < x.size(); ++i) {
      pending_.push_back(x[i]);
      if (pending_.size() == frame_len_) {
        const std::int64_t end = first_index + static_cast<std::int64_t>(i);
        Decide(dsp::FrameEnergy(pending_), end + 1 - frame_len_, end, out);
        pending_.clear();
      }
    }
  }

  // A trailing partial frame is never scored.
  void Drain(std::int64_t, std::vector<DetectionEvent>&) override {
    pending_.clear();
  }

  bool InEvent() const override { return tracker_.open(); }
  void CloseOpenEvent(std::int64_t offset,
                      std::vector<DetectionEvent>& out) override {
    tracker_.CloseAt(offset, out);
  }
  std::int64_t decisions() const override { return frames_; }

 private:
  void Decide(double energy, std::int64_t start, std::int64_t end,
              std::vector<DetectionEvent>& out) {
    ++frames_;
    if (ring_.full()) {
      const std::size_t n = ring_.size();
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += ring_[i];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = ring_[i] - mean;
        var += d * d;
      }
      const double sigma = std::sqrt(var / static_cast<double>(n));
      if (sigma >= kSilenceFloor) {
        const double threshold = mean + k_ * sigma;
        if (energy > threshold) {
          tracker_.Impulsive(start, end, energy / threshold, out);
          return;
        }
      }
    }
    ring_.Push(energy);
    tracker_.Quiet(end, out);
  }

  double k_;
  std::size_t frame_len_;
  Ring ring_;
  EventTracker tracker_;
  std::vector<double> pending_;
  std::int64_t frames_ = 0;
};

class PredictionEngine final : public DetectorEngine {
 public:
  explicit PredictionEngine(const DetectorConfig& c)
      : k_(c.threshold_k),
        order_(c.order),
        block_len_(static_cast<std::size_t>(c.block_len)),
        warped_(c.variant == Variant::kWlp),
        warp_(warped_ ? dsp::WarpParams(c.lambda) : dsp::WarpParams(0.0)),
        chain_(warp_, c.order),
        taps_(static_cast<std::size_t>(c.order), 0.0),
        stats_(static_cast<std::size_t>(c.history_len),
               static_cast<std::size_t>(c.stat_hop)),
        tracker_(c.variant, c.merge_gap) {
    block_.reserve(block_len_);
  }

  void Consume(std::span<const double> x, std::int64_t first_index,
               std::vector<DetectionEvent>& out) override {
    std::size_t i = 0;
    while (i < x.size()) {
      const std::size_t take = std::min(block_len_ - block_.size(), x.size() - i);
      block_.insert(block_.end(), x.begin() + i, x.begin() + i + take);
      i += take;
      if (block_.size() == block_len_) {
        const std::int64_t block_start = first_index + static_cast<std::int64_t>(i) -
                                         static_cast<std::int64_t>(block_len_);
        ProcessBlock(block_start, out);
        block_.clear();
      }
    }
  }

  void Drain(std::int64_t first_index,
             std::vector<DetectionEvent>& out) override {
    if (block_.empty()) return;
    ProcessBlock(first_index - static_cast<std::int64_t>(block_.size()), out);
    block_.clear();
  }

  bool InEvent() const override { return tracker_.open(); }
  void CloseOpenEvent(std::int64_t offset,
                      std::vector<DetectionEvent>& out) override {
    tracker_.CloseAt(offset, out);
  }
  std::int64_t decisions() const override { return decisions_; }

 private:
  void Refit() {
    if (block_.size() <= static_cast<std::size_t>(order_)) return;
    try {
      const auto r = warped_ ? dsp::WarpedAutocorrelation(block_, warp_, order_)
                             : dsp::Autocorrelation(block_, order_);
      model_.emplace(dsp::LevinsonDurbin(r, order_));
    } catch (const DegenerateSignalError&) {
      // Keep the previous model (if any).
    } catch (const IllConditionedError&) {
    }
  }

  void ProcessBlock(std::int64_t block_start, std::vector<DetectionEvent>& out) {
    Refit();
    const auto a = model_ ? model_->coeffs() : std::span<const double>{};
    for (std::size_t j = 0; j < block_.size(); ++j) {
      const double x = block_[j];
      const std::int64_t index = block_start + static_cast<std::int64_t>(j);
      if (warped_) chain_.Process(x, taps_);
      if (model_) {
        double residual = x;
        for (std::size_t i = 0; i < a.size(); ++i) residual -= a[i] * taps_[i];
        Classify(index, residual, out);
      } else {
        tracker_.Quiet(index, out);
      }
      if (!warped_) {
        // Plain delay line: taps_[i] = x[n - 1 - i] for the next sample.
        for (std::size_t i = taps_.size() - 1; i > 0; --i) taps_[i] = taps_[i - 1];
        taps_[0] = x;
      }
    }
  }

  void Classify(std::int64_t index, double residual,
                std::vector<DetectionEvent>& out) {
    ++decisions_;
    const auto sigma = stats_.sigma();
    if (sigma && *sigma >= kSilenceFloor) {
      const double threshold = k_ * *sigma;
      const double magnitude = std::fabs(residual);
      if (magnitude > threshold) {
        tracker_.Impulsive(index, index, magnitude / threshold, out);
        return;
      }
    }
    stats_.Add(residual);
    tracker_.Quiet(index, out);
  }

  double k_;
  int order_;
  std::size_t block_len_;
  bool warped_;
  dsp::WarpParams warp_;
  dsp::AllpassChain chain_;
  std::vector<double> taps_;
  std::vector<double> block_;
  std::optional<dsp::LpcModel> model_;
  ResidualStats stats_;
  EventTracker tracker_;
  std::int64_t decisions_ = 0;
};

std::unique_ptr<DetectorEngine> MakeEngine(const DetectorConfig& c) {
  if (c.variant == Variant::kEnergy) return std::make_unique<EnergyEngine>(c);
  return std::make_unique<PredictionEngine>(c);
}

}  // namespace

Detector::Detector(DetectorConfig config) : config_(std::move(config)) {
  config_.Validate();
  engine_ = MakeEngine(config_);
}

Detector::~Detector() = default;
Detector::Detector(Detector&&) noexcept = default;
Detector& Detector::operator=(Detector&&) noexcept = default;

std::vector<DetectionEvent> Detector::Push(const SampleBuffer& chunk) {
  return Push(chunk.samples(), chunk.sample_rate_hz());
}

std::vector<DetectionEvent> Detector::Push(std::span<const double> chunk,
                                           int sample_rate_hz) {
  if (flushed_) {
    throw ContractError("push after flush; call Reset() to start a new stream");
  }
  if (sample_rate_hz_ && *sample_rate_hz_ != sample_rate_hz) {
    throw ContractError("sample rate changed mid-stream from " +
                        std::to_string(*sample_rate_hz_) + " to " +
                        std::to_string(sample_rate_hz) + " Hz");
  }
  sample_rate_hz_ = sample_rate_hz;
  std::vector<DetectionEvent> out;
  engine_->Consume(chunk, consumed_, out);
  consumed_ += static_cast<std::int64_t>(chunk.size());
  return out;
}

std::vector<DetectionEvent> Detector::Flush() {
  std::vector<DetectionEvent> out;
  if (flushed_) return out;
  flushed_ = true;
  engine_->Drain(consumed_, out);
  engine_->CloseOpenEvent(consumed_ - 1, out);
  return out;
}

void Detector::Reset() {
  engine_ = MakeEngine(config_);
  consumed_ = 0;
  sample_rate_hz_.reset();
  flushed_ = false;
}

bool Detector::in_event() const { return engine_->InEvent(); }

std::int64_t Detector::decisions_made() const { return engine_->decisions(); }

std::vector<DetectionEvent> DetectAll(const DetectorConfig& config,
                                      std::span<const double> samples,
                                      int sample_rate_hz,
                                      std::size_t chunk_len) {
  if (chunk_len == 0) throw InvalidArgument("chunk length must be positive");
  Detector detector(config);
  std::vector<DetectionEvent> events;
  for (std::size_t i = 0; i < samples.size(); i += chunk_len) {
    const auto chunk = samples.subspan(i, std::min(chunk_len, samples.size() - i));
    auto got = detector.Push(chunk, sample_rate_hz);
    events.insert(events.end(), got.begin(), got.end());
  }
  auto tail = detector.Flush();
  events.insert(events.end(), tail.begin(), tail.end());
  return events;
}

}  // namespace impulse

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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "impulse/errors.h"
#include "oracles.h"

namespace impulse {
namespace {

constexpr int kRate = 44100;

std::vector<Variant> AllVariants() {
  return {Variant::kEnergy, Variant::kLpc, Variant::kWlp};
}

std::string Name(Variant v) { return std::string(VariantName(v)); }

// Same spans everywhere, scores equal up to rounding differences between
// the library and the long-double oracle.
void ExpectMatchesReference(const std::vector<DetectionEvent>& got,
                            const std::vector<DetectionEvent>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].onset_sample, want[i].onset_sample) << "event " << i;
    EXPECT_EQ(got[i].offset_sample, want[i].offset_sample) << "event " << i;
    EXPECT_NEAR(got[i].peak_score, want[i].peak_score, 1e-9 * want[i].peak_score);
    EXPECT_EQ(got[i].variant, want[i].variant);
  }
}

void ExpectWellFormed(const std::vector<DetectionEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_GE(events[i].offset_sample, events[i].onset_sample);
    EXPECT_GE(events[i].peak_score, 1.0);
    if (i > 0) EXPECT_GT(events[i].onset_sample, events[i - 1].offset_sample);
  }
}

// Coloured noise with a few decaying clicks.
std::vector<double> ClickTrack(std::size_t n, std::uint64_t seed) {
  const std::vector<double> a = {0.6, -0.2};
  auto x = oracle::ArProcess(a, n, 0.02, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_int_distribution<std::size_t> where(n / 2, n - 400);
  for (int c = 0; c < 4; ++c) {
    const std::size_t at = where(rng);
    double amp = 0.5;
    for (std::size_t i = at; i < at + 300; ++i, amp *= 0.98) x[i] += amp * ((i % 2) ? 1 : -1);
  }
  return x;
}

TEST(VariantTest, NamesRoundTrip) {
  for (Variant v : AllVariants()) EXPECT_EQ(ParseVariant(VariantName(v)), v);
  EXPECT_FALSE(ParseVariant("lpc10").has_value());
}

TEST(DetectorConfigTest, DefaultsPerVariant) {
  const auto energy = DetectorConfig::Defaults(Variant::kEnergy);
  EXPECT_EQ(energy.frame_len, 350);
  EXPECT_EQ(energy.history_len, 30);
  EXPECT_DOUBLE_EQ(energy.threshold_k, 5.0);
  const auto wlp = DetectorConfig::Defaults(Variant::kWlp);
  EXPECT_EQ(wlp.history_len, 4410);
  EXPECT_EQ(wlp.order, 5);
  EXPECT_DOUBLE_EQ(wlp.lambda, -0.7);
  EXPECT_EQ(wlp.block_len, 2048);
  EXPECT_EQ(wlp.merge_gap, 100);
}

TEST(DetectorConfigTest, RejectsLambdaOutOfRange) {
  auto c = DetectorConfig::Defaults(Variant::kWlp);
  c.lambda = 1.2;
  try {
    Detector d(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "lambda");
    EXPECT_NE(std::string(e.what()).find("lambda out of range"), std::string::npos);
  }
}

TEST(DetectorConfigTest, RejectsShortBlock) {
  auto c = DetectorConfig::Defaults(Variant::kLpc);
  c.block_len = 10;
  try {
    c.Validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "block_len");
    EXPECT_NE(std::string(e.what()).find("block too short for order"), std::string::npos);
  }
}

TEST(DetectorConfigTest, RejectsOtherInvariants) {
  auto c = DetectorConfig::Defaults(Variant::kEnergy);
  c.threshold_k = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = DetectorConfig::Defaults(Variant::kEnergy);
  c.frame_len = 1;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = DetectorConfig::Defaults(Variant::kLpc);
  c.stat_hop = c.history_len + 1;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(DetectorTest, FreshState) {
  Detector d(DetectorConfig::Defaults(Variant::kEnergy));
  EXPECT_EQ(d.samples_consumed(), 0);
  EXPECT_EQ(d.decisions_made(), 0);
  EXPECT_FALSE(d.in_event());
  EXPECT_TRUE(d.Flush().empty());
}

TEST(DetectorTest, SilenceEmitsNothing) {
  const std::vector<double> zeros(30 * kRate, 0.0);
  for (Variant v : AllVariants()) {
    EXPECT_TRUE(DetectAll(DetectorConfig::Defaults(v), zeros, kRate).empty()) << Name(v);
  }
}

TEST(DetectorTest, EnergyFrameCount) {
  Detector d(DetectorConfig::Defaults(Variant::kEnergy));
  const auto x = oracle::WhiteNoise(30 * kRate, 0.01, 1);
  d.Push(x, kRate);
  d.Flush();
  EXPECT_EQ(d.decisions_made(), 3780);
  EXPECT_EQ(d.samples_consumed(), 1323000);
}

TEST(DetectorTest, EnergyBurstMatchesBruteForce) {
  const auto x = oracle::BurstInNoise(30 * kRate, 50000, 400, 1);
  const auto config = DetectorConfig::Defaults(Variant::kEnergy);
  const auto events = DetectAll(config, x, kRate);
  ExpectMatchesReference(events, oracle::EnergyEvents(x, config));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_GE(events[0].onset_sample, 49700);
  EXPECT_LE(events[0].onset_sample, 50050);
}

TEST(DetectorTest, PredictionBurstOnsetIsSampleAccurate) {
  const auto x = oracle::BurstInNoise(30 * kRate, 50000, 400, 1);
  for (Variant v : {Variant::kLpc, Variant::kWlp}) {
    const auto events = DetectAll(DetectorConfig::Defaults(v), x, kRate);
    ASSERT_FALSE(events.empty()) << Name(v);
    EXPECT_NEAR(static_cast<double>(events[0].onset_sample), 50000.0, 50.0) << Name(v);
    ExpectWellFormed(events);
  }
}

TEST(DetectorTest, MatchesReferenceDetectors) {
  for (std::uint64_t seed : {3u, 4u}) {
    const auto x = ClickTrack(3 * kRate, seed);
    for (Variant v : AllVariants()) {
      const auto config = DetectorConfig::Defaults(v);
      const auto events = DetectAll(config, x, kRate);
      EXPECT_FALSE(events.empty()) << Name(v);
      ExpectMatchesReference(events, oracle::ReferenceEvents(x, config));
    }
  }
}

TEST(DetectorTest, MatchesReferenceWithNonDefaultShape) {
  const auto x = ClickTrack(2 * kRate, 8);
  auto config = DetectorConfig::Defaults(Variant::kWlp);
  config.order = 10;
  config.lambda = 0.3;
  config.block_len = 1000;
  config.history_len = 2000;
  config.stat_hop = 7;
  config.merge_gap = 20;
  config.threshold_k = 4.0;
  ExpectMatchesReference(DetectAll(config, x, kRate), oracle::ReferenceEvents(x, config));
}

TEST(DetectorTest, ChunkingInvariance) {
  const auto x = ClickTrack(10000, 5);
  std::mt19937_64 rng(99);
  for (Variant v : AllVariants()) {
    auto config = DetectorConfig::Defaults(v);
    if (v != Variant::kEnergy) config.history_len = 1000;
    const auto whole = DetectAll(config, x, kRate, x.size());
    for (int trial = 0; trial < 7; ++trial) {
      std::vector<std::size_t> cuts = {0, x.size()};
      std::uniform_int_distribution<std::size_t> pos(1, x.size() - 1);
      for (int i = 0; i < 1 + trial * 5; ++i) cuts.push_back(pos(rng));
      std::sort(cuts.begin(), cuts.end());
      Detector d(config);
      std::vector<DetectionEvent> got;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const std::span<const double> chunk(x.data() + cuts[i], cuts[i + 1] - cuts[i]);
        auto e = d.Push(chunk, kRate);
        got.insert(got.end(), e.begin(), e.end());
      }
      auto tail = d.Flush();
      got.insert(got.end(), tail.begin(), tail.end());
      EXPECT_EQ(got, whole) << Name(v) << " trial " << trial;
    }
  }
}

TEST(DetectorTest, OneChunkVersusSmallChunks) {
  const auto x = oracle::BurstInNoise(30 * kRate, 50000, 400, 2);
  for (Variant v : AllVariants()) {
    const auto config = DetectorConfig::Defaults(v);
    EXPECT_EQ(DetectAll(config, x, kRate, x.size()), DetectAll(config, x, kRate, 512))
        << Name(v);
  }
}

TEST(DetectorTest, ZeroLambdaWlpEqualsLpc) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto x = ClickTrack(2 * kRate, seed);
    auto wlp = DetectorConfig::Defaults(Variant::kWlp);
    wlp.lambda = 0.0;
    const auto a = DetectAll(wlp, x, kRate);
    const auto b = DetectAll(DetectorConfig::Defaults(Variant::kLpc), x, kRate);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_TRUE(SameSpanAndScore(a[i], b[i]));
      EXPECT_EQ(a[i].variant, Variant::kWlp);
    }
  }
}

// Below k ~ 3 most samples are flagged and never reach the background
// statistics, so events fuse and the count can fall again; the property is
// only claimed over the operating range.
TEST(DetectorTest, RaisingThresholdNeverAddsEventsInOperatingRange) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto x = ClickTrack(kRate, seed);
    for (Variant v : AllVariants()) {
      auto config = DetectorConfig::Defaults(v);
      if (v != Variant::kEnergy) config.history_len = 2000;
      std::size_t previous = SIZE_MAX;
      for (double k = 3.0; k <= 40.0; k *= 1.35) {
        config.threshold_k = k;
        const std::size_t n = DetectAll(config, x, kRate).size();
        EXPECT_LE(n, previous) << Name(v) << " k=" << k;
        previous = n;
      }
    }
  }
}

TEST(DetectorTest, ColdStartSuppressesDetection) {
  auto x = oracle::WhiteNoise(20 * 350, 0.01, 3);
  for (std::size_t i = 3500; i < 3600; ++i) x[i] = 1.0;
  // 20 frames never fill a 30-frame history.
  EXPECT_TRUE(DetectAll(DetectorConfig::Defaults(Variant::kEnergy), x, kRate).empty());
}

TEST(DetectorTest, FlushClosesEventAtLastSample) {
  for (Variant v : AllVariants()) {
    // Energy events end with their last impulsive frame; lpc/wlp events stay
    // open for merge_gap samples after the last impulsive sample.
    auto x = oracle::WhiteNoise(2 * kRate, 0.01, 4);
    const std::size_t burst = x.size() - (v == Variant::kEnergy ? 700 : 60);
    for (std::size_t i = burst; i < x.size(); ++i) x[i] += 1.0;
    Detector d(DetectorConfig::Defaults(v));
    auto during = d.Push(x, kRate);
    EXPECT_TRUE(during.empty()) << Name(v);
    EXPECT_TRUE(d.in_event() || v != Variant::kEnergy) << Name(v);
    const auto closed = d.Flush();
    ASSERT_EQ(closed.size(), 1u) << Name(v);
    EXPECT_EQ(closed[0].offset_sample, static_cast<std::int64_t>(x.size()) - 1);
    EXPECT_NEAR(static_cast<double>(closed[0].onset_sample), static_cast<double>(burst),
                v == Variant::kEnergy ? 350.0 : 50.0);
    EXPECT_TRUE(d.Flush().empty());
    EXPECT_FALSE(d.in_event());
  }
}

TEST(DetectorTest, StreamContract) {
  Detector d(DetectorConfig::Defaults(Variant::kLpc));
  const std::vector<double> x(100, 0.0);
  d.Push(x, kRate);
  EXPECT_THROW(d.Push(x, 48000), ContractError);
  d.Flush();
  EXPECT_THROW(d.Push(x, kRate), ContractError);
  d.Reset();
  EXPECT_NO_THROW(d.Push(x, 48000));
  EXPECT_EQ(d.samples_consumed(), 100);
}

TEST(DetectorTest, ResetMatchesFreshDetector) {
  const auto x = ClickTrack(kRate, 30);
  const auto y = ClickTrack(kRate, 31);
  for (Variant v : AllVariants()) {
    auto config = DetectorConfig::Defaults(v);
    config.threshold_k = 7.5;
    Detector used(config);
    used.Push(x, kRate);
    used.Reset();
    EXPECT_FALSE(used.in_event());
    EXPECT_EQ(used.samples_consumed(), 0);
    EXPECT_DOUBLE_EQ(used.config().threshold_k, 7.5);
    auto a = used.Push(y, kRate);
    auto tail = used.Flush();
    a.insert(a.end(), tail.begin(), tail.end());
    EXPECT_EQ(a, DetectAll(config, y, kRate)) << Name(v);
  }
}

TEST(DetectorTest, ResetMidEventClearsFlag) {
  auto x = oracle::WhiteNoise(kRate, 0.01, 6);
  for (std::size_t i = x.size() - 1000; i < x.size(); ++i) x[i] += 1.0;
  Detector d(DetectorConfig::Defaults(Variant::kEnergy));
  d.Push(x, kRate);
  ASSERT_TRUE(d.in_event());
  d.Reset();
  EXPECT_FALSE(d.in_event());
}

TEST(DetectorTest, EventsAreOrderedAndDisjoint) {
  const auto x = ClickTrack(4 * kRate, 40);
  for (Variant v : AllVariants()) {
    auto config = DetectorConfig::Defaults(v);
    config.threshold_k = 3.0;
    ExpectWellFormed(DetectAll(config, x, kRate));
  }
}

}  // namespace
}  // namespace impulse

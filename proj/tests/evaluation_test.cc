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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "impulse/errors.h"
#include "impulse/wav.h"
#include "oracles.h"
#include "test_dir.h"

namespace impulse {
namespace {

MixtureRecord Truth(std::int64_t onset, std::int64_t len) {
  MixtureRecord r;
  r.onset_sample = onset;
  r.event_len_samples = len;
  r.clip_len_samples = 100000;
  return r;
}

DetectionEvent Ev(std::int64_t on, std::int64_t off) {
  DetectionEvent e;
  e.onset_sample = on;
  e.offset_sample = off;
  e.peak_score = 2.0;
  return e;
}

TEST(ScoreClipTest, Cases) {
  const auto truth = Truth(1000, 100);  // accepted span [900, 1200] with tol 100
  struct Case {
    std::vector<DetectionEvent> det;
    ClipScore want;
  };
  const std::vector<Case> cases = {
      {{}, {0, 1, 0}},
      {{Ev(1050, 1060)}, {1, 0, 0}},
      {{Ev(800, 900)}, {1, 0, 0}},      // touches the lower edge
      {{Ev(1200, 1300)}, {1, 0, 0}},    // touches the upper edge
      {{Ev(800, 899)}, {0, 1, 1}},
      {{Ev(1201, 1300)}, {0, 1, 1}},
      {{Ev(10, 20), Ev(950, 960), Ev(990, 5000), Ev(9000, 9001)}, {1, 0, 2}},
      {{Ev(0, 99999)}, {1, 0, 0}},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    EXPECT_EQ(ScoreClip(cases[i].det, truth, 100), cases[i].want) << "case " << i;
  }
  const std::vector<DetectionEvent> unsorted = {Ev(2000, 2001), Ev(1000, 1001)};
  EXPECT_THROW(ScoreClip(unsorted, truth, 100), ContractError);
  EXPECT_THROW(ScoreClip({}, truth, -1), InvalidArgument);
  EXPECT_EQ(DefaultToleranceSamples(44100), 2205);
}

TEST(LogGridTest, EndpointsAndRatios) {
  const auto g = LogGrid(3.0, 300.0, 20);
  ASSERT_EQ(g.size(), 20u);
  EXPECT_DOUBLE_EQ(g.front(), 3.0);
  EXPECT_DOUBLE_EQ(g.back(), 300.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_NEAR(std::log(g[i] / g[i - 1]), std::log(100.0) / 19, 1e-12);
  }
  EXPECT_EQ(DefaultKGrid(), g);
  EXPECT_THROW(LogGrid(0.0, 1.0, 3), InvalidArgument);
  EXPECT_THROW(LogGrid(2.0, 1.0, 3), InvalidArgument);
}

class SweepTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    spec_ = new CorpusSpec();
    spec_->count = 6;
    spec_->clip_len_s = 5.0;
    spec_->seed = 21;
    clips_ = new std::vector<EvalClip>();
    for (int i = 0; i < spec_->count; ++i) {
      auto c = SynthesizeClip(*spec_, i);
      clips_->push_back({c.mixture, c.record});
    }
  }
  static void TearDownTestSuite() {
    delete clips_;
    delete spec_;
  }
  static SweepResult Run(Variant v, const std::vector<double>& grid, SweepOptions o) {
    return RunDetSweep(DetectorConfig::Defaults(v), clips_->size(),
                       [](std::size_t i) { return (*clips_)[i]; }, grid, o);
  }
  static CorpusSpec* spec_;
  static std::vector<EvalClip>* clips_;
};
CorpusSpec* SweepTest::spec_ = nullptr;
std::vector<EvalClip>* SweepTest::clips_ = nullptr;

TEST_F(SweepTest, CountsMatchDirectScoring) {
  const std::vector<double> grid = {4.0, 8.0, 1000.0};
  const auto r = Run(Variant::kEnergy, grid, {});
  ASSERT_EQ(r.points.size(), 3u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    DetectorConfig cfg = DetectorConfig::Defaults(Variant::kEnergy);
    cfg.threshold_k = grid[i];
    std::int64_t md = 0, fp = 0;
    for (std::size_t c = 0; c < clips_->size(); ++c) {
      const auto& clip = (*clips_)[c];
      const auto ev = DetectAll(cfg, clip.mixture.samples(), clip.mixture.sample_rate_hz());
      const auto s = ScoreClip(ev, clip.truth, 2205);
      EXPECT_EQ(r.per_k[i].per_clip[c], s);
      md += s.miss_detections;
      fp += s.false_positives;
    }
    EXPECT_DOUBLE_EQ(r.points[i].md_rate, static_cast<double>(md) / clips_->size());
    EXPECT_DOUBLE_EQ(r.points[i].fp_per_clip, static_cast<double>(fp) / clips_->size());
    EXPECT_EQ(r.points[i].threshold_k, grid[i]);
    EXPECT_FALSE(r.points[i].ebr_db.has_value());
  }
  EXPECT_EQ(r.points.back().md_rate, 1.0);
  EXPECT_EQ(r.points.back().fp_per_clip, 0.0);
}

TEST_F(SweepTest, ThreadCountDoesNotChangeResults) {
  const std::vector<double> grid = {5.0, 7.0, 12.0};
  SweepOptions one;
  SweepOptions four;
  four.threads = 4;
  for (Variant v : {Variant::kEnergy, Variant::kWlp}) {
    const auto a = Run(v, grid, one);
    const auto b = Run(v, grid, four);
    EXPECT_EQ(a.points, b.points);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_EQ(a.per_k[i].per_clip, b.per_k[i].per_clip);
    }
  }
}

TEST_F(SweepTest, ByEbrPartitionsThePool) {
  const std::vector<double> grid = {5.0, 9.0};
  SweepOptions o;
  o.by_ebr = true;
  const auto r = Run(Variant::kEnergy, grid, o);
  ASSERT_EQ(r.points.size(), 3u * grid.size());
  const std::vector<double> levels = {-6.0, 0.0, 6.0};
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& p = r.points[g * grid.size() + i];
      ASSERT_TRUE(p.ebr_db.has_value());
      EXPECT_EQ(*p.ebr_db, levels[g]);
      int md = 0, n = 0;
      for (std::size_t c = 0; c < clips_->size(); ++c) {
        if ((*clips_)[c].truth.ebr_db != levels[g]) continue;
        ++n;
        md += r.per_k[i].per_clip[c].miss_detections;
      }
      EXPECT_DOUBLE_EQ(p.md_rate, static_cast<double>(md) / n);
    }
  }
}

TEST_F(SweepTest, RejectsBadGrids) {
  EXPECT_THROW(Run(Variant::kEnergy, {}, {}), InvalidArgument);
  EXPECT_THROW(Run(Variant::kEnergy, {5.0, 5.0}, {}), InvalidArgument);
}

TEST(SweepFromManifestTest, MissingClipNamesIndex) {
  ScopedTestDir dir;
  CorpusSpec spec;
  spec.count = 3;
  spec.clip_len_s = 5.0;
  const auto m = GenerateCorpus(spec, dir.path());
  const std::vector<double> grid = {5.0};
  const auto ok = RunDetSweep(DetectorConfig(), m, dir.path(), grid, {});
  EXPECT_EQ(ok.per_k[0].truth_events(), 3);
  std::filesystem::remove(MixturePath(dir.path(), 2));
  try {
    RunDetSweep(DetectorConfig(), m, dir.path(), grid, {});
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
}

TEST(DetCsvTest, RoundTrip) {
  ScopedTestDir dir;
  std::vector<DetPoint> pts = {
      {3.0, 0.0, 12.5, std::nullopt, Variant::kLpc},
      {6.2070, 0.125, 0.0, -6.0, Variant::kWlp},
      {300.0, 1.0, 0.0, 6.0, Variant::kEnergy},
  };
  ExportDetCsv(pts, dir / "det.csv");
  EXPECT_EQ(ParseDetCsv(dir / "det.csv"), pts);
  std::ostringstream s;
  WriteDetCsv(pts, s);
  std::istringstream lines(s.str());
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first, kDetCsvHeader);
  EXPECT_THROW(ExportDetCsv({}, dir / "empty.csv"), InvalidArgument);
  EXPECT_THROW(ParseDetCsv(dir / "missing.csv"), IoError);
}

TEST(BenchmarkTest, ReportsConsistentNumbers) {
  const SampleBuffer clip(oracle::WhiteNoise(44100, 0.1, 8), 44100);
  EXPECT_THROW(Benchmark(DetectorConfig(), clip, 2), InvalidArgument);
  EXPECT_THROW(Benchmark(DetectorConfig(), SampleBuffer({}, 44100), 3), InvalidArgument);
  const auto r = Benchmark(DetectorConfig::Defaults(Variant::kLpc), clip, 3);
  EXPECT_EQ(r.variant, Variant::kLpc);
  EXPECT_DOUBLE_EQ(r.clip_duration_s, 1.0);
  EXPECT_GT(r.wall_time_s, 0.0);
  EXPECT_NEAR(r.real_time_factor, r.wall_time_s / 1.0, 1e-12);
  EXPECT_NEAR(r.samples_per_second * r.wall_time_s, 44100.0, 1e-6);
  EXPECT_NE(BenchReportToJsonLine(r).find("\"variant\":\"lpc\""), std::string::npos);
}

}  // namespace
}  // namespace impulse

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


// Throughput of the three detectors on a synthetic 30 s, 44.1 kHz mixture,
// plus the DSP kernels they spend their time in.

#include <benchmark/benchmark.h>

#include <vector>

#include "impulse/corpus.h"
#include "impulse/detector.h"
#include "impulse/dsp.h"

namespace {

const impulse::SynthesizedClip& Clip() {
  static const impulse::SynthesizedClip clip = [] {
    impulse::CorpusSpec spec;
    spec.seed = 11;
    return impulse::SynthesizeClip(spec, 0);
  }();
  return clip;
}

void BM_Detect(benchmark::State& state, impulse::Variant variant) {
  const auto& mixture = Clip().mixture;
  const auto config = impulse::DetectorConfig::Defaults(variant);
  for (auto _ : state) {
    auto events = impulse::DetectAll(config, mixture.samples(), mixture.sample_rate_hz());
    benchmark::DoNotOptimize(events);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(mixture.size()));
  state.counters["rtf"] = benchmark::Counter(
      mixture.duration_seconds(),
      benchmark::Counter::kIsIterationInvariantRate | benchmark::Counter::kInvert);
}
BENCHMARK_CAPTURE(BM_Detect, energy, impulse::Variant::kEnergy)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Detect, lpc, impulse::Variant::kLpc)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Detect, wlp, impulse::Variant::kWlp)->Unit(benchmark::kMillisecond);

void BM_LevinsonBlock(benchmark::State& state) {
  const auto x = Clip().mixture.samples().subspan(0, 2048);
  for (auto _ : state) {
    auto model = impulse::dsp::LevinsonDurbin(impulse::dsp::Autocorrelation(x, 5), 5);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_LevinsonBlock);

void BM_WarpedAutocorrelationBlock(benchmark::State& state) {
  const auto x = Clip().mixture.samples().subspan(0, 2048);
  const impulse::dsp::WarpParams warp(-0.7);
  for (auto _ : state) {
    auto r = impulse::dsp::WarpedAutocorrelation(x, warp, 5);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_WarpedAutocorrelationBlock);

}  // namespace

BENCHMARK_MAIN();

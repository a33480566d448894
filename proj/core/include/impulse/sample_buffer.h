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

#ifndef IMPULSE_SAMPLE_BUFFER_H_
#define IMPULSE_SAMPLE_BUFFER_H_

#include <cstddef>
#include <span>
#include <vector>

namespace impulse {

inline constexpr int kDefaultSampleRateHz = 44100;

// Mono PCM at a fixed sample rate. Samples are finite and nominally in
// [-1, 1]; the constructor rejects NaN/Inf and non-positive rates.
class SampleBuffer {
 public:
  SampleBuffer() = default;
  SampleBuffer(std::vector<double> samples, int sample_rate_hz);

  std::span<const double> samples() const { return samples_; }
  int sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

  // Moves the sample storage out, leaving the buffer empty.
  std::vector<double> Release() && { return std::move(samples_); }

 private:
  std::vector<double> samples_;
  int sample_rate_hz_ = kDefaultSampleRateHz;
};

}  // namespace impulse

#endif  // IMPULSE_SAMPLE_BUFFER_H_

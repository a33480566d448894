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

// Minimal RIFF/WAVE support: 16-bit PCM and 32-bit IEEE float, mono or
// multi-channel (down-mixed to mono by averaging on read).

#ifndef IMPULSE_WAV_H_
#define IMPULSE_WAV_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "impulse/sample_buffer.h"

namespace impulse {

enum class WavEncoding { kPcm16, kFloat32 };

// Incremental reader, so long recordings can be streamed in bounded chunks.
class WavReader {
 public:
  // Throws IoError if the file cannot be opened or is shorter than its
  // header claims, FormatError for anything other than PCM16/float32.
  explicit WavReader(const std::filesystem::path& path);

  int sample_rate_hz() const { return sample_rate_hz_; }
  int channels() const { return channels_; }
  WavEncoding encoding() const { return encoding_; }
  std::int64_t total_frames() const { return total_frames_; }
  std::int64_t frames_left() const { return total_frames_ - frames_read_; }

  // Fills up to out.size() mono samples and returns how many were written;
  // 0 at end of data.
  std::size_t Read(std::span<double> out);

 private:
  std::ifstream in_;
  int sample_rate_hz_ = 0;
  int channels_ = 0;
  WavEncoding encoding_ = WavEncoding::kPcm16;
  std::int64_t total_frames_ = 0;
  std::int64_t frames_read_ = 0;
  std::vector<char> raw_;
};

SampleBuffer ReadWav(const std::filesystem::path& path);

// Writes a mono file. Samples outside [-1, 1] are clamped; the return value is
// the number of clamped samples. Throws InvalidArgument for an empty buffer
// and IoError if the file cannot be written.
std::int64_t WriteWav(const std::filesystem::path& path,
                      const SampleBuffer& buffer, WavEncoding encoding);

}  // namespace impulse

#endif  // IMPULSE_WAV_H_

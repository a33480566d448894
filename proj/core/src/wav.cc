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

#include "impulse/wav.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "impulse/errors.h"

namespace impulse {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr double kPcm16Scale = 32768.0;

std::uint16_t U16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

std::uint32_t U32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

template <typename T>
void Put(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

WavReader::WavReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string());

  std::array<char, 12> riff{};
  if (!in_.read(riff.data(), riff.size())) {
    throw IoError(path.string() + ": truncated RIFF header");
  }
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 ||
      std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int bits = 0;
  std::uint16_t format = 0;
  std::array<char, 8> chunk{};
  while (in_.read(chunk.data(), chunk.size())) {
    const std::uint32_t size = U32(chunk.data() + 4);
    if (std::memcmp(chunk.data(), "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path.string() + ": short fmt chunk");
      std::vector<char> fmt(size);
      if (!in_.read(fmt.data(), size)) {
        throw IoError(path.string() + ": truncated fmt chunk");
      }
      format = U16(fmt.data());
      channels_ = U16(fmt.data() + 2);
      sample_rate_hz_ = static_cast<int>(U32(fmt.data() + 4));
      bits = U16(fmt.data() + 14);
      if (format == kFormatExtensible) {
        if (size < 26) throw FormatError(path.string() + ": short extensible fmt");
        format = U16(fmt.data() + 24);  // first two bytes of the sub-format GUID
      }
      if (size % 2 == 1) in_.ignore(1);
      have_fmt = true;
    } else if (std::memcmp(chunk.data(), "data", 4) == 0) {
      if (!have_fmt) throw FormatError(path.string() + ": data before fmt");
      if (format == kFormatPcm && bits == 16) {
        encoding_ = WavEncoding::kPcm16;
      } else if (format == kFormatFloat && bits == 32) {
        encoding_ = WavEncoding::kFloat32;
      } else {
        throw FormatError(path.string() + ": unsupported encoding (format " +
                          std::to_string(format) + ", " + std::to_string(bits) +
                          " bits); need 16-bit PCM or 32-bit float");
      }
      if (channels_ < 1 || sample_rate_hz_ <= 0) {
        throw FormatError(path.string() + ": invalid channel count or rate");
      }
      const std::uint64_t offset = static_cast<std::uint64_t>(in_.tellg());
      if (offset + size > file_size) {
        throw IoError(path.string() + ": truncated data chunk (" +
                      std::to_string(file_size - offset) + " of " +
                      std::to_string(size) + " bytes present)");
      }
      const std::uint32_t frame_bytes =
          static_cast<std::uint32_t>(channels_) * static_cast<std::uint32_t>(bits / 8);
      total_frames_ = size / frame_bytes;
      return;
    } else {
      in_.ignore(size + (size % 2));
    }
  }
  throw IoError(path.string() + (have_fmt ? ": no data chunk" : ": no fmt chunk"));
}

std::size_t WavReader::Read(std::span<double> out) {
  const std::size_t frames =
      static_cast<std::size_t>(std::min<std::int64_t>(frames_left(), out.size()));
  if (frames == 0) return 0;
  const std::size_t width = encoding_ == WavEncoding::kPcm16 ? 2 : 4;
  const std::size_t frame_bytes = width * static_cast<std::size_t>(channels_);
  raw_.resize(frames * frame_bytes);
  if (!in_.read(raw_.data(), static_cast<std::streamsize>(raw_.size()))) {
    throw IoError("unexpected end of WAV data");
  }
  const double inv_channels = 1.0 / channels_;
  for (std::size_t f = 0; f < frames; ++f) {
    const char* p = raw_.data() + f * frame_bytes;
    double sum = 0.0;
    for (int c = 0; c < channels_; ++c, p += width) {
      if (encoding_ == WavEncoding::kPcm16) {
        sum += static_cast<std::int16_t>(U16(p)) / kPcm16Scale;
      } else {
        float v;
        std::memcpy(&v, p, sizeof v);
        sum += v;
      }
    }
    out[f] = channels_ == 1 ? sum : sum * inv_channels;
  }
  frames_read_ += static_cast<std::int64_t>(frames);
  return frames;
}

SampleBuffer ReadWav(const std::filesystem::path& path) {
  WavReader reader(path);
  std::vector<double> samples(static_cast<std::size_t>(reader.total_frames()));
  std::size_t got = 0;
  while (got < samples.size()) {
    const std::size_t n = reader.Read(std::span(samples).subspan(got));
    if (n == 0) break;
    got += n;
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw FormatError(path.string() + ": non-finite sample");
  }
  return SampleBuffer(std::move(samples), reader.sample_rate_hz());
}

std::int64_t WriteWav(const std::filesystem::path& path,
                      const SampleBuffer& buffer, WavEncoding encoding) {
  if (buffer.empty()) throw InvalidArgument("refusing to write an empty WAV");
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(buffer.size() * (bits / 8));

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  Put<std::uint32_t>(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  Put<std::uint32_t>(out, 16);
  Put<std::uint16_t>(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  Put<std::uint16_t>(out, 1);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate_hz()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate_hz()) * (bits / 8));
  Put<std::uint16_t>(out, bits / 8);
  Put<std::uint16_t>(out, bits);
  out.append("data");
  Put<std::uint32_t>(out, data_bytes);

  std::int64_t clipped = 0;
  for (double v : buffer.samples()) {
    if (v > 1.0 || v < -1.0) {
      ++clipped;
      v = std::clamp(v, -1.0, 1.0);
    }
    if (encoding == WavEncoding::kPcm16) {
      const double q = std::clamp(std::round(v * kPcm16Scale), -32768.0, 32767.0);
      Put<std::int16_t>(out, static_cast<std::int16_t>(q));
    } else {
      Put<float>(out, static_cast<float>(v));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path.string());
  return clipped;
}

}  // namespace impulse

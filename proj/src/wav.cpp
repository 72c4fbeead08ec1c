/*
Copyright 2026 The SHAMaNS Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "shamans/signal.hpp"

namespace shamans {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t U32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t U16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void PutU16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

AudioBuffer ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  Require(data.size() >= 12, ErrorKind::kIo,
          "truncated WAV header in " + path.string());
  Require(std::memcmp(data.data(), "RIFF", 4) == 0 &&
              std::memcmp(data.data() + 8, "WAVE", 4) == 0,
          ErrorKind::kFormat, path.string() + " is not a RIFF/WAVE file");

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::uint32_t size = U32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Require(size >= 16 && body + 16 <= data.size(), ErrorKind::kIo,
              "truncated fmt chunk in " + path.string());
      format = U16(data.data() + body);
      channels = U16(data.data() + body + 2);
      rate = U32(data.data() + body + 4);
      bits = U16(data.data() + body + 14);
      if (format == kFormatExtensible) {
        Require(size >= 40 && body + 26 <= data.size(), ErrorKind::kFormat,
                "malformed WAVE_FORMAT_EXTENSIBLE header");
        format = U16(data.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      Require(have_fmt, ErrorKind::kFormat, "data chunk precedes fmt chunk");
      Require(body + size <= data.size(), ErrorKind::kIo,
              "truncated data chunk in " + path.string());
      payload = data.data() + body;
      payload_size = size;
      break;
    }
    pos = body + size + (size & 1u);
  }
  Require(have_fmt, ErrorKind::kFormat, "missing fmt chunk");
  Require(payload != nullptr, ErrorKind::kIo,
          "missing data chunk in " + path.string());
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  Require(pcm16 || f32, ErrorKind::kFormat,
          "unsupported WAV encoding (only PCM16 and float32)");
  Require(channels >= 1 && rate > 0, ErrorKind::kFormat,
          "WAV declares zero channels or zero rate");

  const std::size_t width = bits / 8;
  const std::size_t frames = payload_size / (width * channels);
  Require(frames >= 1, ErrorKind::kIo, "WAV file has no samples");

  AudioBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(channels, static_cast<Index>(frames));
  for (std::size_t s = 0; s < frames; ++s) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = payload + (s * channels + c) * width;
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(U16(p));
        out.samples(c, s) = v / 32768.0;
      } else {
        const std::uint32_t bitsv = U32(p);
        float v;
        std::memcpy(&v, &bitsv, 4);
        out.samples(c, s) = v;
      }
    }
  }
  out.Validate();
  return out;
}

void WriteWav(const AudioBuffer& audio, const std::filesystem::path& path,
              WavEncoding encoding) {
  audio.Validate();
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorKind::kIo, "cannot write " + path.string());
  const auto channels = static_cast<std::uint16_t>(audio.channels());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint32_t block = channels * bits / 8;
  const std::uint32_t data_size =
      block * static_cast<std::uint32_t>(audio.length());

  os.write("RIFF", 4);
  PutU32(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  PutU32(os, 16);
  PutU16(os, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  PutU16(os, channels);
  PutU32(os, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(os, static_cast<std::uint32_t>(audio.sample_rate) * block);
  PutU16(os, static_cast<std::uint16_t>(block));
  PutU16(os, bits);
  os.write("data", 4);
  PutU32(os, data_size);
  for (Index s = 0; s < audio.length(); ++s) {
    for (Index c = 0; c < audio.channels(); ++c) {
      const double v = audio.samples(c, s);
      if (encoding == WavEncoding::kPcm16) {
        const double scaled = std::clamp(v * 32768.0, -32768.0, 32767.0);
        PutU16(os, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(std::lround(scaled))));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t b;
        std::memcpy(&b, &f, 4);
        PutU32(os, b);
      }
    }
  }
  Require(os.good(), ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace shamans

// stylerank/wav.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// RIFF/WAVE reading and writing. Supported: 16-bit integer PCM and 32-bit
// float PCM (plain or WAVE_FORMAT_EXTENSIBLE), any channel count; multichannel
// input is averaged to mono.

#ifndef STYLERANK_WAV_HPP_
#define STYLERANK_WAV_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stylerank/embedding.hpp"  // detail::read_file / write_file
#include "stylerank/error.hpp"

namespace stylerank {

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

namespace detail {

inline std::uint16_t get_u16(const char *p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

inline void put_u16(std::vector<char> &buf, std::uint16_t v) {
  char b[2];
  std::memcpy(b, &v, 2);
  buf.insert(buf.end(), b, b + 2);
}

}  // namespace detail

inline Waveform decode_wav(std::span<const char> bytes,
                           const std::string &what = "wav") {
  auto fail = [&](const std::string &msg) -> void {
    throw IoError(what + ": " + msg);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const char *data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char *chunk = bytes.data() + pos;
    const std::uint32_t size = detail::get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (std::memcmp(chunk, "data", 4) == 0) fail("truncated data chunk");
      break;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail("short fmt chunk");
      format = detail::get_u16(chunk + 8);
      channels = detail::get_u16(chunk + 10);
      rate = detail::get_u32(chunk + 12);
      bits = detail::get_u16(chunk + 22);
      if (format == 0xFFFE) {
        if (size < 40) fail("short extensible fmt chunk");
        format = detail::get_u16(chunk + 8 + 24);  // sub-format GUID prefix
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0) fail("missing fmt chunk");
  if (data == nullptr) fail("missing data chunk");

  const bool pcm16 = format == 1 && bits == 16;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !f32)
    fail("unsupported encoding (format " + std::to_string(format) + ", " +
         std::to_string(bits) + " bits)");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  Waveform w;
  w.sample_rate_hz = static_cast<int>(rate);
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const char *p = data + (i * channels + c) * width;
      if (pcm16) {
        std::int16_t s;
        std::memcpy(&s, p, 2);
        acc += s / 32768.0;
      } else {
        float f;
        std::memcpy(&f, p, 4);
        acc += f;
      }
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

inline std::vector<char> encode_wav(const Waveform &w,
                                    WavEncoding enc = WavEncoding::kFloat32) {
  const std::uint16_t bits = enc == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t format = enc == WavEncoding::kPcm16 ? 1 : 3;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::vector<char> buf;
  buf.reserve(44 + data_size);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(buf, 36 + data_size);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(buf, 16);
  detail::put_u16(buf, format);
  detail::put_u16(buf, 1);
  detail::put_u32(buf, static_cast<std::uint32_t>(w.sample_rate_hz));
  detail::put_u32(buf, static_cast<std::uint32_t>(w.sample_rate_hz) * bits / 8);
  detail::put_u16(buf, bits / 8);
  detail::put_u16(buf, bits);
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(buf, data_size);
  for (double s : w.samples) {
    if (enc == WavEncoding::kPcm16) {
      const double c = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
      const auto q = static_cast<std::int16_t>(c * 32767.0 + (c >= 0 ? 0.5 : -0.5));
      detail::put_u16(buf, static_cast<std::uint16_t>(q));
    } else {
      const float f = static_cast<float>(s);
      char b[4];
      std::memcpy(b, &f, 4);
      buf.insert(buf.end(), b, b + 4);
    }
  }
  return buf;
}

inline Waveform load_wav(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  return decode_wav(bytes, path.string());
}

inline void save_wav(const std::filesystem::path &path, const Waveform &w,
                     WavEncoding enc = WavEncoding::kFloat32) {
  detail::write_file(path, encode_wav(w, enc));
}

}  // namespace stylerank

#endif  // STYLERANK_WAV_HPP_

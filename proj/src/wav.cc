// src/wav.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsc/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "hsc/error.h"

namespace hsc {

namespace {

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void write_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16le(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

AudioRecord load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32le(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size()) {
      throw FormatError("truncated chunk '" + std::string(id, 4) + "' in " +
                        path);
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too small in " + path);
      const unsigned char* p = bytes.data() + pos;
      audio_format = read_u16le(p);
      channels = read_u16le(p + 2);
      sample_rate = read_u32le(p + 4);
      bits = read_u16le(p + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw FormatError("missing fmt or data chunk in " + path);
  }
  if (audio_format != 1) {
    throw UnsupportedFormatError("only PCM WAV is supported: " + path);
  }
  if (channels != 1) {
    throw UnsupportedFormatError("only mono WAV is supported (" +
                                 std::to_string(channels) + " channels): " +
                                 path);
  }
  if (bits != 16) {
    throw UnsupportedFormatError("only 16-bit WAV is supported (" +
                                 std::to_string(bits) + " bits): " + path);
  }
  if (sample_rate == 0) throw FormatError("zero sample rate in " + path);
  if (data_size < 2) throw FormatError("empty data chunk in " + path);

  AudioRecord rec;
  rec.record_id = std::filesystem::path(path).stem().string();
  rec.sample_rate_hz = static_cast<int>(sample_rate);
  const std::size_t n = data_size / 2;
  rec.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(read_u16le(data + 2 * i));
    rec.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return rec;
}

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate_hz) {
  if (samples.empty()) throw InvalidInputError("refusing to write empty WAV");
  if (sample_rate_hz <= 0) throw InvalidInputError("sample rate must be > 0");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);

  const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  write_u32le(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_u32le(os, 16);
  write_u16le(os, 1);  // PCM
  write_u16le(os, 1);  // mono
  write_u32le(os, static_cast<std::uint32_t>(sample_rate_hz));
  write_u32le(os, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  write_u16le(os, 2);
  write_u16le(os, 16);
  os.write("data", 4);
  write_u32le(os, data_size);
  for (double x : samples) {
    double q = std::round(x * 32768.0);
    if (q > 32767.0) q = 32767.0;
    if (q < -32768.0) q = -32768.0;
    write_u16le(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!os) throw Error("short write: " + path);
}

}  // namespace hsc

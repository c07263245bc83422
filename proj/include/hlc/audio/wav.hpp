#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "hlc/error.hpp"

// RIFF/WAVE reader and writer for 16-bit PCM and 32-bit float, mono or stereo.

namespace hlc {

enum class SampleFormat { pcm16, float32 };

struct WavData {
  int sample_rate = 16000;
  SampleFormat format = SampleFormat::pcm16;
  std::vector<std::vector<double>> channels;  // [channel][sample], nominal range [-1, 1]

  std::size_t frames() const { return channels.empty() ? 0 : channels[0].size(); }
  int channel_count() const { return static_cast<int>(channels.size()); }
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
inline std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

inline void put32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

inline WavData decode_wav(const std::vector<unsigned char>& bytes, const std::string& origin = "<memory>") {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError(origin + ": RIFF chunk: not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(&bytes[pos]), 4);
    std::size_t len = le32(&bytes[pos + 4]);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      if (id != "data") throw FormatError(origin + ": " + id + " chunk: truncated");
      len = bytes.size() - body;  // tolerate writers that leave a stale data length
    }
    if (id == "fmt ") {
      if (len < 16) throw FormatError(origin + ": fmt chunk: too short");
      tag = le16(&bytes[body]);
      channels = le16(&bytes[body + 2]);
      rate = le32(&bytes[body + 4]);
      bits = le16(&bytes[body + 14]);
      if (tag == kFormatExtensible) {
        if (len < 40) throw FormatError(origin + ": fmt chunk: extensible header too short");
        tag = le16(&bytes[body + 24]);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = &bytes[body];
      data_len = len;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt) throw FormatError(origin + ": fmt chunk: missing");
  if (!data) throw FormatError(origin + ": data chunk: missing");
  if (channels < 1 || channels > 2)
    throw FormatError(origin + ": fmt chunk: " + std::to_string(channels) + " channels (mono or stereo only)");
  if (rate == 0) throw FormatError(origin + ": fmt chunk: zero sample rate");

  WavData w;
  w.sample_rate = static_cast<int>(rate);
  if (tag == kFormatPcm && bits == 16)
    w.format = SampleFormat::pcm16;
  else if (tag == kFormatFloat && bits == 32)
    w.format = SampleFormat::float32;
  else
    throw FormatError(origin + ": fmt chunk: unsupported encoding (format tag " + std::to_string(tag) + ", " +
                      std::to_string(bits) + " bits)");

  const std::size_t width = bits / 8;
  const std::size_t n = data_len / (width * channels);
  w.channels.assign(channels, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * width;
      if (w.format == SampleFormat::pcm16) {
        w.channels[c][i] = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        const std::uint32_t u = le32(p);
        float f;
        std::memcpy(&f, &u, 4);
        w.channels[c][i] = f;
      }
    }
  return w;
}

inline std::vector<unsigned char> encode_wav(const WavData& w) {
  using namespace detail;
  if (w.channels.empty() || w.channels.size() > 2) throw ArgumentError("wav: mono or stereo only");
  for (const auto& ch : w.channels)
    if (ch.size() != w.frames()) throw ArgumentError("wav: channels differ in length");
  const std::uint16_t nch = static_cast<std::uint16_t>(w.channels.size());
  const std::uint16_t bits = w.format == SampleFormat::pcm16 ? 16 : 32;
  const std::uint32_t block = nch * bits / 8;
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.frames() * block);

  std::vector<unsigned char> b;
  b.reserve(44 + data_len);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put32(b, 36 + data_len);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(b, 16);
  put16(b, w.format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat);
  put16(b, nch);
  put32(b, static_cast<std::uint32_t>(w.sample_rate));
  put32(b, static_cast<std::uint32_t>(w.sample_rate) * block);
  put16(b, static_cast<std::uint16_t>(block));
  put16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put32(b, data_len);
  for (std::size_t i = 0; i < w.frames(); ++i)
    for (const auto& ch : w.channels) {
      if (w.format == SampleFormat::pcm16) {
        const double v = std::clamp(std::round(ch[i] * 32768.0), -32768.0, 32767.0);
        put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
      } else {
        const float f = static_cast<float>(ch[i]);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        put32(b, u);
      }
    }
  if (data_len & 1) b.push_back(0);
  return b;
}

inline WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path);
}

inline void write_wav(const std::string& path, const WavData& w) {
  const auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace hlc

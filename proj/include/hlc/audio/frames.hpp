#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hlc/error.hpp"

namespace hlc {

struct FrameConfig {
  int sample_rate = 16000;        // Hz
  int frame_length = 160;         // samples (10 ms)
  int hop = 80;                   // samples (5 ms)
  double calibration_offset = 100.0;  // dB SPL of a digital full-scale square wave

  void validate() const {
    if (sample_rate <= 0) throw ArgumentError("frames: sample rate must be positive");
    if (hop <= 0 || hop > frame_length) throw ArgumentError("frames: need 0 < hop <= frame_length");
  }
  double hop_ms() const { return 1000.0 * hop / sample_rate; }
  double frame_rate() const { return static_cast<double>(sample_rate) / hop; }
  // Frame k starts at sample k * hop; the last frame is zero padded.
  std::size_t frame_count(std::size_t samples) const { return (samples + hop - 1) / hop; }
};

inline constexpr double kPowerFloor = 1e-12;

// The gain track does not have one value per frame.
class AlignmentError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Per-frame level 10 log10(mean square + 1e-12) + calibration. With several
/// channels the mean square is averaged across them (one linked level).
inline std::vector<double> estimate_log_power(std::span<const std::vector<double>> channels, const FrameConfig& cfg) {
  cfg.validate();
  if (channels.empty() || channels[0].empty()) throw ArgumentError("estimate_log_power: no samples");
  const std::size_t n = channels[0].size();
  const std::size_t frames = cfg.frame_count(n);
  std::vector<double> out(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const std::size_t begin = k * cfg.hop;
    const std::size_t end = std::min(n, begin + cfg.frame_length);
    double acc = 0.0;
    for (const auto& ch : channels)
      for (std::size_t i = begin; i < end; ++i) acc += ch[i] * ch[i];
    const double ms = acc / (static_cast<double>(cfg.frame_length) * channels.size());
    out[k] = 10.0 * std::log10(ms + kPowerFloor) + cfg.calibration_offset;
  }
  return out;
}

inline std::vector<double> estimate_log_power(std::span<const double> samples, const FrameConfig& cfg) {
  std::vector<std::vector<double>> one{std::vector<double>(samples.begin(), samples.end())};
  return estimate_log_power(std::span<const std::vector<double>>(one), cfg);
}

struct GainApplication {
  std::vector<double> samples;
  std::size_t clipped = 0;
};

/// Multiplies by 10^(g/20). Gain anchors sit at the frame starts k * hop and
/// are interpolated linearly (in linear gain) across each hop; the last one
/// is held to the end. Output is clipped to [-1, 1].
inline GainApplication apply_gain(std::span<const double> samples, std::span<const double> gains_db,
                                  const FrameConfig& cfg) {
  cfg.validate();
  const std::size_t frames = cfg.frame_count(samples.size());
  if (gains_db.size() != frames)
    throw AlignmentError("apply_gain: " + std::to_string(gains_db.size()) + " gains for " +
                         std::to_string(frames) + " frames");
  std::vector<double> lin(gains_db.size());
  for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = std::pow(10.0, gains_db[k] / 20.0);

  GainApplication out;
  out.samples.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t k = i / cfg.hop;
    const double frac = static_cast<double>(i - k * cfg.hop) / cfg.hop;
    const double g = k + 1 < lin.size() ? lin[k] + frac * (lin[k + 1] - lin[k]) : lin[k];
    double y = samples[i] * g;
    if (y > 1.0 || y < -1.0) {
      ++out.clipped;
      y = std::clamp(y, -1.0, 1.0);
    }
    out.samples[i] = y;
  }
  return out;
}

}  // namespace hlc

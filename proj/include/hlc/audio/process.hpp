#pragma once

#include <string>
#include <vector>

#include "hlc/audio/frames.hpp"
#include "hlc/audio/wav.hpp"
#include "hlc/sp/kalman.hpp"

namespace hlc {

struct ProcessResult {
  WavData output;
  FrameConfig frames;
  std::vector<double> levels;    // s_k, dB
  std::vector<GainState> gains;  // posterior over g_k, dB
  std::size_t clipped = 0;

  std::vector<double> applied_gains() const {
    std::vector<double> g(gains.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = gains[k].mean;
    return g;
  }
};

/// Single-band compensation: level per frame, gain by the recursion,
/// posterior mean applied to every channel (stereo shares one linked level).
inline ProcessResult process(const WavData& in, const Theta& theta, FrameConfig cfg = {},
                             GainState g0 = {0.0, 1e4}) {
  if (in.frames() == 0) throw ArgumentError("process: empty audio");
  cfg.sample_rate = in.sample_rate;
  ProcessResult r;
  r.frames = cfg;
  r.levels = estimate_log_power(std::span<const std::vector<double>>(in.channels), cfg);
  r.gains = run_sequence(r.levels, theta, g0);
  const std::vector<double> g = r.applied_gains();
  r.output.sample_rate = in.sample_rate;
  r.output.format = in.format;
  for (const auto& ch : in.channels) {
    GainApplication a = apply_gain(ch, g, cfg);
    r.clipped += a.clipped;
    r.output.channels.push_back(std::move(a.samples));
  }
  return r;
}

inline ProcessResult process_file(const std::string& in_path, const std::string& out_path, const Theta& theta,
                                  const FrameConfig& cfg = {}) {
  ProcessResult r = process(read_wav(in_path), theta, cfg);
  write_wav(out_path, r.output);
  return r;
}

/// Mono test signal: a sine whose level switches between two values every
/// `hold` frames, calibrated so each frame's estimated level is close to
/// the requested dB value.
inline WavData alternating_tone(double level_a, double level_b, std::size_t hold_frames, std::size_t total_frames,
                                const FrameConfig& cfg = {}, double freq_hz = 1000.0) {
  WavData w;
  w.sample_rate = cfg.sample_rate;
  w.format = SampleFormat::float32;
  w.channels.assign(1, std::vector<double>(total_frames * cfg.hop));
  const double two_pi = 6.283185307179586;
  for (std::size_t i = 0; i < w.channels[0].size(); ++i) {
    const std::size_t k = i / cfg.hop;
    const double level = (k / hold_frames) % 2 == 0 ? level_a : level_b;
    // mean square of A sin is A^2/2
    const double amp = std::sqrt(2.0 * std::pow(10.0, (level - cfg.calibration_offset) / 10.0));
    w.channels[0][i] = amp * std::sin(two_pi * freq_hz * i / cfg.sample_rate);
  }
  return w;
}

}  // namespace hlc

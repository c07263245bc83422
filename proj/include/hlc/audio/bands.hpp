#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "hlc/audio/process.hpp"

// Uniform FFT filter bank: sqrt-Hann analysis/synthesis at 50% overlap,
// bins grouped into equal-width bands, one independent gain recursion per band.

namespace hlc {

struct BandResult {
  WavData output;
  FrameConfig frames;
  std::vector<std::vector<double>> levels;    // [band][frame]
  std::vector<std::vector<GainState>> gains;  // [band][frame]
  std::size_t clipped = 0;
};

namespace detail {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Bin range [first, last) of band b out of `bands` over `bins` one-sided bins.
inline std::pair<std::size_t, std::size_t> band_bins(std::size_t b, std::size_t bands, std::size_t bins) {
  return {b * bins / bands, (b + 1) * bins / bands};
}

}  // namespace detail

/// Band-split compensation. Requires frame_length == 2 * hop. Frame k covers
/// samples [(k-1) hop, (k+1) hop) so every sample sees two overlapping frames.
inline BandResult process_bands(const WavData& in, const Theta& theta, int bands, FrameConfig cfg = {},
                                GainState g0 = {0.0, 1e4}) {
  cfg.sample_rate = in.sample_rate;
  cfg.validate();
  if (cfg.frame_length != 2 * cfg.hop) throw ArgumentError("band mode needs frame_length == 2 * hop");
  const std::size_t n_fft = static_cast<std::size_t>(cfg.frame_length);
  const std::size_t bins = n_fft / 2 + 1;
  if (bands < 1 || static_cast<std::size_t>(bands) > bins)
    throw ArgumentError("band count must be in [1, " + std::to_string(bins) + "]");
  if (in.frames() == 0) throw ArgumentError("process_bands: empty audio");

  const std::size_t n = in.frames();
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t frames = (n + hop - 1) / hop + 1;
  const std::size_t nb = static_cast<std::size_t>(bands);

  std::vector<double> window(n_fft);
  double win_energy = 0.0;
  for (std::size_t i = 0; i < n_fft; ++i) {
    window[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * M_PI * i / n_fft));  // periodic sqrt-Hann
    win_energy += window[i] * window[i];
  }

  std::unique_ptr<double, detail::FftwFree> time(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  std::unique_ptr<fftw_complex, detail::FftwFree> freq(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  detail::FftwPlan fwd(fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), time.get(), freq.get(), FFTW_ESTIMATE));
  detail::FftwPlan inv(fftw_plan_dft_c2r_1d(static_cast<int>(n_fft), freq.get(), time.get(), FFTW_ESTIMATE));

  // spectra[channel][frame][bin]
  std::vector<std::vector<std::vector<std::complex<double>>>> spectra(
      in.channels.size(), std::vector<std::vector<std::complex<double>>>(frames));
  BandResult r;
  r.frames = cfg;
  r.levels.assign(nb, std::vector<double>(frames, 0.0));
  for (std::size_t c = 0; c < in.channels.size(); ++c) {
    const auto& x = in.channels[c];
    for (std::size_t k = 0; k < frames; ++k) {
      for (std::size_t i = 0; i < n_fft; ++i) {
        const long idx = static_cast<long>(k * hop + i) - static_cast<long>(hop);
        time.get()[i] = (idx >= 0 && static_cast<std::size_t>(idx) < n) ? x[idx] * window[i] : 0.0;
      }
      fftw_execute(fwd.get());
      auto& spec = spectra[c][k];
      spec.resize(bins);
      for (std::size_t j = 0; j < bins; ++j) spec[j] = {freq.get()[j][0], freq.get()[j][1]};
      for (std::size_t b = 0; b < nb; ++b) {
        auto [lo, hi] = detail::band_bins(b, nb, bins);
        double p = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
          const double w = (j == 0 || j == bins - 1) ? 1.0 : 2.0;  // one-sided spectrum
          p += w * std::norm(spec[j]);
        }
        // Parseval: sum over bands equals the windowed frame's mean square
        r.levels[b][k] += p / (static_cast<double>(n_fft) * win_energy);
      }
    }
  }
  for (auto& band : r.levels)
    for (double& v : band) v = 10.0 * std::log10(v / in.channels.size() + kPowerFloor) + cfg.calibration_offset;

  r.gains.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) r.gains[b] = run_sequence(r.levels[b], theta, g0);

  r.output.sample_rate = in.sample_rate;
  r.output.format = in.format;
  for (std::size_t c = 0; c < in.channels.size(); ++c) {
    std::vector<double> y(n + 2 * hop, 0.0);  // offset by hop: y[i + hop] is sample i
    for (std::size_t k = 0; k < frames; ++k) {
      const auto& spec = spectra[c][k];
      for (std::size_t b = 0; b < nb; ++b) {
        const double g = std::pow(10.0, r.gains[b][k].mean / 20.0);
        auto [lo, hi] = detail::band_bins(b, nb, bins);
        for (std::size_t j = lo; j < hi; ++j) {
          freq.get()[j][0] = g * spec[j].real();
          freq.get()[j][1] = g * spec[j].imag();
        }
      }
      fftw_execute(inv.get());
      for (std::size_t i = 0; i < n_fft; ++i) {
        const std::size_t idx = k * hop + i;
        if (idx < y.size()) y[idx] += time.get()[i] * window[i] / static_cast<double>(n_fft);
      }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = y[i + hop];
      if (v > 1.0 || v < -1.0) {
        ++r.clipped;
        v = std::clamp(v, -1.0, 1.0);
      }
      out[i] = v;
    }
    r.output.channels.push_back(std::move(out));
  }
  return r;
}

}  // namespace hlc

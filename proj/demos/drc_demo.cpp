// Compression of a tone that alternates between 55 and 80 dB.
// Usage: drc_demo [out.wav]

#include <cstdio>
#include <iostream>

#include "hlc/audio/process.hpp"
#include "hlc/sp/characterize.hpp"

int main(int argc, char** argv) {
  const hlc::Theta theta;  // alpha 2, beta -90
  const hlc::FrameConfig cfg;
  const auto c = hlc::characterize(theta, 55.0, 80.0);
  hlc::print(std::cout, c, cfg.hop_ms());

  const hlc::WavData tone = hlc::alternating_tone(55.0, 80.0, 40, 200, cfg);
  const hlc::ProcessResult r = hlc::process(tone, theta, cfg);
  std::printf("\nframe  level_db  gain_db  output_db\n");
  for (std::size_t k = 30; k < 90; k += 5)
    std::printf("%5zu  %8.2f  %7.2f  %9.2f\n", k, r.levels[k], r.gains[k].mean, r.levels[k] + r.gains[k].mean);
  std::printf("clipped samples: %zu\n", r.clipped);

  if (argc > 1) {
    hlc::write_wav(argv[1], r.output);
    std::printf("wrote %s\n", argv[1]);
  }
}

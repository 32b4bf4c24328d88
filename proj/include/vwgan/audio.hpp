#pragma once

#include <vector>

#include "vwgan/errors.hpp"

namespace vwgan {

// Mono waveform, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 24000;
};

inline void check_sample_rate(int rate) {
  if (rate != 8000 && rate != 16000 && rate != 24000)
    throw ValueError("unsupported sample rate " + std::to_string(rate) +
                     " (expected 8000, 16000 or 24000)");
}

}  // namespace vwgan

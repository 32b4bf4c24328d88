#pragma once

#include <vector>

#include "vwgan/kernels.hpp"
#include "vwgan/tensor.hpp"

namespace vwgan {

enum class WindowKind { hann, rectangular };

struct StftConfig {
  int fft_size = 1024;
  int hop_size = 120;
  int win_size = 600;
  WindowKind window = WindowKind::hann;

  void validate() const {
    if (fft_size <= 0 || hop_size <= 0 || win_size <= 0)
      throw ValueError("stft sizes must be positive");
    if (win_size > fft_size) throw ValueError("win_size must not exceed fft_size");
    if (hop_size > win_size) throw ValueError("hop_size must not exceed win_size");
  }

  bool operator==(const StftConfig&) const = default;
};

kernels::DftPlan make_plan(const StftConfig& cfg);

// The three analysis resolutions used by the spectral loss, given for 24 kHz
// as (1024,120,600), (2048,240,1200), (512,50,240) and scaled proportionally
// for other rates (fft rounded up to the next even size).
std::vector<StftConfig> default_resolutions(int sample_rate);

// Non-differentiating magnitude for feature extraction and spectrogram dumps.
// Returns [frames, fft/2+1]; requires len(x) >= win_size.
Tensor stft_magnitude_value(const std::vector<double>& x, const kernels::DftPlan& plan);

}  // namespace vwgan

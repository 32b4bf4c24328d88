#pragma once

#include <vector>

namespace vwgan::ref {

// Serial brute-force kernels. These are deliberately written as the plainest
// possible loops and share no code with the production kernels; tests and the
// benchmark compare the two paths against each other.

// Dilated 1-D convolution with symmetric "same" zero padding.
// in [B, Ci, T], w [Co, Ci, K] (K odd), bias [Co] (may be empty), out [B, Co, T].
std::vector<double> conv1d(const std::vector<double>& in, const std::vector<double>& w,
                           const std::vector<double>& bias, int B, int Ci, int Co, int T, int K,
                           int dilation);

// Magnitude of the short-time Fourier transform via a direct O(N^2) DFT.
// Frames start at f*hop, have win samples, are multiplied by `window`
// (length win) and zero-padded to fft points. Returns [frames, fft/2+1]
// row-major; frames = 1 + (n - win) / hop.
std::vector<double> stft_magnitude(const std::vector<double>& x, const std::vector<double>& window,
                                   int fft, int hop, int win);

}  // namespace vwgan::ref

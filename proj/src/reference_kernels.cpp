#include "vwgan/reference_kernels.hpp"

#include <cmath>

namespace vwgan::ref {

std::vector<double> conv1d(const std::vector<double>& in, const std::vector<double>& w,
                           const std::vector<double>& bias, int B, int Ci, int Co, int T, int K,
                           int dilation) {
  std::vector<double> out(static_cast<size_t>(B) * Co * T, 0.0);
  const int center = K / 2;
  for (int b = 0; b < B; ++b) {
    for (int oc = 0; oc < Co; ++oc) {
      for (int t = 0; t < T; ++t) {
        double acc = bias.empty() ? 0.0 : bias[oc];
        for (int ic = 0; ic < Ci; ++ic) {
          for (int k = 0; k < K; ++k) {
            int src = t + (k - center) * dilation;
            if (src < 0 || src >= T) continue;
            acc += w[(static_cast<size_t>(oc) * Ci + ic) * K + k] *
                   in[(static_cast<size_t>(b) * Ci + ic) * T + src];
          }
        }
        out[(static_cast<size_t>(b) * Co + oc) * T + t] = acc;
      }
    }
  }
  return out;
}

std::vector<double> stft_magnitude(const std::vector<double>& x, const std::vector<double>& window,
                                   int fft, int hop, int win) {
  const int frames = 1 + (static_cast<int>(x.size()) - win) / hop;
  const int bins = fft / 2 + 1;
  std::vector<double> mag(static_cast<size_t>(frames) * bins, 0.0);
  for (int f = 0; f < frames; ++f) {
    for (int k = 0; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < win; ++n) {
        double v = window[n] * x[static_cast<size_t>(f) * hop + n];
        double ang = 2.0 * M_PI * k * n / fft;
        re += v * std::cos(ang);
        im -= v * std::sin(ang);
      }
      mag[static_cast<size_t>(f) * bins + k] = std::sqrt(re * re + im * im);
    }
  }
  return mag;
}

}  // namespace vwgan::ref

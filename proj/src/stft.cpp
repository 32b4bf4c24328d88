#include "vwgan/stft.hpp"

#include <cmath>

namespace vwgan {

kernels::DftPlan make_plan(const StftConfig& cfg) {
  cfg.validate();
  return kernels::make_dft_plan(cfg.fft_size, cfg.hop_size, cfg.win_size,
                                cfg.window == WindowKind::hann);
}

std::vector<StftConfig> default_resolutions(int sample_rate) {
  static const int base[3][3] = {{1024, 120, 600}, {2048, 240, 1200}, {512, 50, 240}};
  const double s = static_cast<double>(sample_rate) / 24000.0;
  std::vector<StftConfig> out;
  for (const auto& b : base) {
    StftConfig cfg;
    cfg.hop_size = std::max(1, static_cast<int>(std::lround(b[1] * s)));
    cfg.win_size = std::max(2, static_cast<int>(std::lround(b[2] * s)));
    cfg.fft_size = 2 * static_cast<int>(std::ceil(b[0] * s / 2.0));
    if (cfg.fft_size < cfg.win_size) cfg.fft_size = cfg.win_size + (cfg.win_size % 2);
    if (cfg.hop_size > cfg.win_size) cfg.hop_size = cfg.win_size;
    cfg.validate();
    out.push_back(cfg);
  }
  return out;
}

Tensor stft_magnitude_value(const std::vector<double>& x, const kernels::DftPlan& plan) {
  if (static_cast<int>(x.size()) < plan.win)
    throw ValueError("signal length " + std::to_string(x.size()) +
                     " shorter than analysis window " + std::to_string(plan.win));
  const int F = kernels::num_frames(static_cast<int>(x.size()), plan);
  Tensor mag({F, plan.bins});
  std::vector<double> re(static_cast<size_t>(F) * plan.bins), im(re.size());
  kernels::stft_forward(mag.ptr(), re.data(), im.data(), x.data(), static_cast<int>(x.size()),
                        plan);
  return mag;
}

}  // namespace vwgan

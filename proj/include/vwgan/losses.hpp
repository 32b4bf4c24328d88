#pragma once

#include <vector>

#include "vwgan/ops.hpp"
#include "vwgan/stft.hpp"

namespace vwgan {

// Magnitudes are clamped here before the log to avoid -inf on silent bins.
constexpr double kMagClampFloor = 1e-7;

struct GanLossConfig {
  double lambda_adv = 4.0;

  void validate() const {
    if (lambda_adv <= 0.0) throw ValueError("lambda_adv must be positive");
  }
};

// The multi-resolution spectral loss configuration; owns the DFT plans so a
// single instance can be reused across many tapes.
class StftLoss {
 public:
  explicit StftLoss(std::vector<StftConfig> resolutions);

  const std::vector<StftConfig>& resolutions() const { return cfgs_; }
  const std::vector<kernels::DftPlan>& plans() const { return plans_; }
  int max_win() const;

 private:
  std::vector<StftConfig> cfgs_;
  std::vector<kernels::DftPlan> plans_;
};

// ||mag_x - mag_xhat||_F / ||mag_x||_F. Throws NumericError when the
// reference magnitude is all zero.
Var spectral_convergence(Var mag_x, Var mag_xhat);

// Mean over bins of |log mag_x - log mag_xhat| with clamped magnitudes.
Var log_stft_magnitude_loss(Var mag_x, Var mag_xhat);

// (1/M) sum over resolutions of (spectral convergence + log magnitude loss).
Var multi_res_stft_loss(Var x, Var xhat, const StftLoss& cfg);

// Sum of mask-weighted x divided by the active count.
Var masked_mean(Var x, const Tensor& mask, int64_t active);

// LSGAN terms; expectations realized as means over time (and batch items at
// the call site).
Var discriminator_loss(Var real_scores, Var fake_scores);
Var discriminator_loss_masked(Var real_scores, Var fake_scores, const Tensor& mask,
                              int64_t active);
Var adversarial_loss(Var fake_scores);  // mean (1 - s)^2
Var adversarial_loss_masked(Var fake_scores, const Tensor& mask, int64_t active);

}  // namespace vwgan

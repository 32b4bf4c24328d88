#include "vwgan/losses.hpp"

#include <algorithm>
#include <cmath>

namespace vwgan {

StftLoss::StftLoss(std::vector<StftConfig> resolutions) : cfgs_(std::move(resolutions)) {
  if (cfgs_.empty()) throw ValueError("multi-resolution stft loss needs at least one resolution");
  for (const auto& c : cfgs_) c.validate();
  for (size_t i = 0; i < cfgs_.size(); i++) {
    for (size_t j = i + 1; j < cfgs_.size(); j++) {
      if (cfgs_[i].fft_size == cfgs_[j].fft_size && cfgs_[i].hop_size == cfgs_[j].hop_size &&
          cfgs_[i].win_size == cfgs_[j].win_size) {
        throw ValueError("stft loss resolutions must be pairwise distinct");
      }
    }
  }
  plans_.reserve(cfgs_.size());
  for (const auto& c : cfgs_) plans_.push_back(make_plan(c));
}

int StftLoss::max_win() const {
  int w = 0;
  for (const auto& c : cfgs_) w = std::max(w, c.win_size);
  return w;
}

Var spectral_convergence(Var mag_x, Var mag_xhat) {
  const Tensor& ref = mag_x.tape->val(mag_x);
  const Tensor& est = mag_xhat.tape->val(mag_xhat);
  if (ref.shape != est.shape) {
    throw ShapeError("spectral_convergence: magnitude shapes differ " + shape_str(ref.shape) +
                     " vs " + shape_str(est.shape));
  }
  double ss = 0.0;
  for (double v : ref.data) ss += v * v;
  if (ss <= 0.0) throw NumericError("spectral_convergence: reference magnitude is all zero");
  Var num = ops::frobenius_norm(ops::sub(mag_x, mag_xhat));
  Var den = ops::frobenius_norm(mag_x);
  return ops::div(num, den);
}

Var log_stft_magnitude_loss(Var mag_x, Var mag_xhat) {
  const Tensor& ref = mag_x.tape->val(mag_x);
  const Tensor& est = mag_xhat.tape->val(mag_xhat);
  if (ref.shape != est.shape) {
    throw ShapeError("log_stft_magnitude_loss: magnitude shapes differ " + shape_str(ref.shape) +
                     " vs " + shape_str(est.shape));
  }
  // val() references go stale once new nodes are recorded; grab the count now.
  const int64_t n = ref.numel();
  Var lx = ops::log(ops::clamp_min(mag_x, kMagClampFloor));
  Var lxh = ops::log(ops::clamp_min(mag_xhat, kMagClampFloor));
  Var diff = ops::sub(lx, lxh);
  return ops::scale(ops::l1_norm(diff), 1.0 / static_cast<double>(n));
}

Var multi_res_stft_loss(Var x, Var xhat, const StftLoss& cfg) {
  Tape& tape = *x.tape;
  const Tensor& xv = tape.val(x);
  const Tensor& xhv = tape.val(xhat);
  if (xv.rank() != 1 || xhv.rank() != 1) {
    throw ShapeError("multi_res_stft_loss: waveforms must be rank 1");
  }
  if (xv.numel() != xhv.numel()) {
    throw ShapeError("multi_res_stft_loss: waveform lengths differ " +
                     std::to_string(xv.numel()) + " vs " + std::to_string(xhv.numel()));
  }
  if (xv.numel() < cfg.max_win()) {
    throw ValueError("multi_res_stft_loss: waveform shorter than the largest analysis window");
  }
  Var acc;
  bool first = true;
  for (const auto& plan : cfg.plans()) {
    Var mx = ops::stft_magnitude(x, plan);
    Var mxh = ops::stft_magnitude(xhat, plan);
    Var term = ops::add(spectral_convergence(mx, mxh), log_stft_magnitude_loss(mx, mxh));
    acc = first ? term : ops::add(acc, term);
    first = false;
  }
  return ops::scale(acc, 1.0 / static_cast<double>(cfg.plans().size()));
}

Var masked_mean(Var x, const Tensor& mask, int64_t active) {
  const Tensor& xv = x.tape->val(x);
  if (xv.numel() != mask.numel()) {
    throw ShapeError("masked_mean: mask has " + std::to_string(mask.numel()) +
                     " entries for " + std::to_string(xv.numel()) + " values");
  }
  if (active <= 0) throw ValueError("masked_mean: active count must be positive");
  return ops::scale(ops::sum(ops::mul_const(x, mask)), 1.0 / static_cast<double>(active));
}

namespace {

Var one_minus(Var scores) { return ops::add_scalar(ops::scale(scores, -1.0), 1.0); }

void check_scores(Var scores, const char* who) {
  if (scores.tape->val(scores).numel() == 0) {
    throw ShapeError(std::string(who) + ": empty score vector");
  }
}

}  // namespace

Var discriminator_loss(Var real_scores, Var fake_scores) {
  check_scores(real_scores, "discriminator_loss");
  check_scores(fake_scores, "discriminator_loss");
  Var real_term = ops::mean(ops::square(one_minus(real_scores)));
  Var fake_term = ops::mean(ops::square(fake_scores));
  return ops::add(real_term, fake_term);
}

Var discriminator_loss_masked(Var real_scores, Var fake_scores, const Tensor& mask,
                              int64_t active) {
  check_scores(real_scores, "discriminator_loss_masked");
  check_scores(fake_scores, "discriminator_loss_masked");
  Var real_term = masked_mean(ops::square(one_minus(real_scores)), mask, active);
  Var fake_term = masked_mean(ops::square(fake_scores), mask, active);
  return ops::add(real_term, fake_term);
}

Var adversarial_loss(Var fake_scores) {
  check_scores(fake_scores, "adversarial_loss");
  return ops::mean(ops::square(one_minus(fake_scores)));
}

Var adversarial_loss_masked(Var fake_scores, const Tensor& mask, int64_t active) {
  check_scores(fake_scores, "adversarial_loss_masked");
  return masked_mean(ops::square(one_minus(fake_scores)), mask, active);
}

}  // namespace vwgan

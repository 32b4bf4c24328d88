#pragma once

#include "vwgan/discriminator.hpp"
#include "vwgan/generator.hpp"
#include "vwgan/losses.hpp"
#include "vwgan/upsample.hpp"

namespace vwgan {

// Full generator objective on one clip:
//   total = stft + (lambda_adv / 2) * (adv_v + adv_uv)
// with each adversarial term averaged over its mask's active samples; a mask
// with no active samples contributes exactly zero.
struct GeneratorLossParts {
  Var total, stft, adv_v, adv_uv;
  Var xhat;  // [1,1,T]
};

GeneratorLossParts generator_loss(Tape& tape, const Tensor& x, const Tensor& z,
                                  const Tensor& frames, int hop, const VoicingMasks& masks,
                                  const LiftedGenerator& gen, const GeneratorConfig& gcfg,
                                  const LiftedDiscriminator& d_v, const LiftedDiscriminator& d_uv,
                                  const VoicingAwareConfig& dcfg, const GanLossConfig& gan,
                                  const StftLoss& stft_cfg);

// Both discriminators' LSGAN objectives on one clip, xhat given as a detached
// constant. total = d_v + d_uv (their parameters are disjoint).
struct DiscriminatorLossParts {
  Var total, d_v, d_uv;
};

DiscriminatorLossParts discriminator_step_loss(Tape& tape, const Tensor& x, const Tensor& xhat,
                                               const Tensor& frames, int hop,
                                               const VoicingMasks& masks,
                                               const LiftedDiscriminator& d_v,
                                               const LiftedDiscriminator& d_uv,
                                               const VoicingAwareConfig& dcfg);

}  // namespace vwgan

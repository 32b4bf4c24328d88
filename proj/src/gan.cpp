#include "vwgan/gan.hpp"

namespace vwgan {

namespace {

Tensor mask_b1t(const std::vector<double>& m) {
  Tensor t({1, 1, static_cast<int>(m.size())});
  t.data = m;
  return t;
}

Var zero_scalar(Tape& tape) { return tape.leaf(Tensor::scalar(0.0), false); }

}  // namespace

GeneratorLossParts generator_loss(Tape& tape, const Tensor& x, const Tensor& z,
                                  const Tensor& frames, int hop, const VoicingMasks& masks,
                                  const LiftedGenerator& gen, const GeneratorConfig& gcfg,
                                  const LiftedDiscriminator& d_v, const LiftedDiscriminator& d_uv,
                                  const VoicingAwareConfig& dcfg, const GanLossConfig& gan,
                                  const StftLoss& stft_cfg) {
  if (x.rank() != 1) throw ShapeError("generator_loss: x must be rank 1, got " + shape_str(x.shape));
  const int T = x.dim(0);
  if (static_cast<int>(masks.n_samples()) != T)
    throw ShapeError("generator_loss: masks cover " + std::to_string(masks.n_samples()) +
                     " samples, x has " + std::to_string(T));

  GeneratorLossParts parts;
  Var zv = tape.leaf(z, false);
  parts.xhat = generator_forward_frames(tape, zv, frames, hop, gen, gcfg);

  Var x1 = tape.leaf(x, false);
  Var xhat1 = ops::reshape(parts.xhat, {T});
  parts.stft = multi_res_stft_loss(x1, xhat1, stft_cfg);

  auto adv_branch = [&](const std::vector<double>& mask_vec, int64_t active,
                        const LiftedDiscriminator& d, const DiscriminatorConfig& cfg) {
    if (active == 0) return zero_scalar(tape);
    Tensor mask = mask_b1t(mask_vec);
    Var psi = discriminator_features(tape, ops::mul_const(parts.xhat, mask), d, cfg);
    Var score;
    if (cfg.conditional) {
      Var c = condition_embedding_frames(tape, frames, hop, d, cfg);
      score = projection_score(tape, psi, d, c);
    } else {
      score = base_score(tape, psi, d);
    }
    score = ops::mul_const(score, mask);
    return adversarial_loss_masked(score, mask, active);
  };
  parts.adv_v = adv_branch(masks.v, masks.active_v(), d_v, dcfg.voiced);
  parts.adv_uv = adv_branch(masks.uv, masks.active_uv(), d_uv, dcfg.unvoiced);

  Var adv_sum = ops::add(parts.adv_v, parts.adv_uv);
  parts.total = ops::add(parts.stft, ops::scale(adv_sum, gan.lambda_adv / 2.0));
  return parts;
}

DiscriminatorLossParts discriminator_step_loss(Tape& tape, const Tensor& x, const Tensor& xhat,
                                               const Tensor& frames, int hop,
                                               const VoicingMasks& masks,
                                               const LiftedDiscriminator& d_v,
                                               const LiftedDiscriminator& d_uv,
                                               const VoicingAwareConfig& dcfg) {
  if (x.rank() != 1 || xhat.rank() != 1)
    throw ShapeError("discriminator_step_loss: waveforms must be rank 1");
  const int T = x.dim(0);
  Var xv = tape.leaf(Tensor({1, 1, T}, x.data), false);
  Var xhv = tape.leaf(Tensor({1, 1, T}, xhat.data), false);
  VoicingScores scores =
      voicing_aware_scores(tape, xv, xhv, frames, hop, masks, d_v, d_uv, dcfg);

  DiscriminatorLossParts parts;
  parts.d_v = masks.active_v() > 0
                  ? discriminator_loss_masked(scores.v_real, scores.v_fake, mask_b1t(masks.v),
                                              masks.active_v())
                  : zero_scalar(tape);
  parts.d_uv = masks.active_uv() > 0
                   ? discriminator_loss_masked(scores.uv_real, scores.uv_fake, mask_b1t(masks.uv),
                                               masks.active_uv())
                   : zero_scalar(tape);
  parts.total = ops::add(parts.d_v, parts.d_uv);
  return parts;
}

}  // namespace vwgan

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vwgan/features.hpp"
#include "vwgan/generator.hpp"
#include "vwgan/ops.hpp"
#include "vwgan/rng.hpp"
#include "vwgan/upsample.hpp"

namespace vwgan {

// 1 + (kernel - 1) * sum(dilations); valid for any non-causal dilated stack.
int receptive_field(int kernel, const std::vector<int>& dilations);

struct DiscriminatorConfig {
  int conv_layers = 6;
  int channels = 64;
  int kernel = 3;
  std::vector<int> dilations = {1, 2, 4, 8, 16, 32};
  double leaky_alpha = 0.2;
  bool conditional = true;
  int aux_dim = kFeatureDim;

  void validate() const;
  int receptive_field() const;

  static DiscriminatorConfig voiced(int channels = 64, int aux_dim = kFeatureDim);
  static DiscriminatorConfig unvoiced(int channels = 64, int aux_dim = kFeatureDim);
};

struct DiscriminatorParams {
  std::vector<ConvParam> stack;  // stack[0]: [C,1,K], rest [C,C,K]
  ConvParam out;                 // [1,C,1]
  ConvParam cond;                // [C,aux,RF]; empty when unconditional

  static DiscriminatorParams init(const DiscriminatorConfig& cfg, Rng& rng);
  static DiscriminatorParams zeros(const DiscriminatorConfig& cfg);
};

void visit_params(DiscriminatorParams& p,
                  const std::function<void(const std::string&, Tensor&)>& fn);

struct LiftedDiscriminator {
  std::vector<LiftedConv> stack;
  LiftedConv out;
  LiftedConv cond;
  bool conditional = false;
};

LiftedDiscriminator lift(Tape& tape, const DiscriminatorParams& p,
                         const DiscriminatorConfig& cfg, bool requires_grad);

std::vector<const Tensor*> lifted_grads(const Tape& tape, const LiftedDiscriminator& d);

// The dilated feature stack psi: wave [B,1,T] -> [B,C,T].
Var discriminator_features(Tape& tape, Var wave, const LiftedDiscriminator& d,
                           const DiscriminatorConfig& cfg);

// Projection conditioning embedding c = conv1d(h, cond.w, cond.b) with kernel
// equal to the receptive field; frames route is the production path.
Var condition_embedding(Tape& tape, const Tensor& h_upsampled, const LiftedDiscriminator& d,
                        const DiscriminatorConfig& cfg);
Var condition_embedding_frames(Tape& tape, const Tensor& frames, int hop,
                               const LiftedDiscriminator& d, const DiscriminatorConfig& cfg);
// No-tape version for reuse as a constant inside the generator update.
Tensor condition_embedding_value(const DiscriminatorParams& p, const Tensor& frames, int hop,
                                 const DiscriminatorConfig& cfg);

// Forward-only score path (no tape), for metric reporting. c may be empty
// for an unconditional configuration. Returns [B,1,T].
Tensor discriminator_score_value(const DiscriminatorParams& p, const DiscriminatorConfig& cfg,
                                 const Tensor& wave, const Tensor& c);

// score[t] = base[t] + sum_ch psi[ch,t] * c[ch,t], shape [B,1,T].
Var projection_score(Tape& tape, Var psi, const LiftedDiscriminator& d, Var c);
Var projection_score_const(Tape& tape, Var psi, const LiftedDiscriminator& d, const Tensor& c);
Var base_score(Tape& tape, Var psi, const LiftedDiscriminator& d);

// Full forward: wave [B,1,T], optional upsampled conditioner -> scores [B,T].
// h_upsampled may be null only for an unconditional configuration.
Var discriminator_forward(Tape& tape, Var wave, const Tensor* h_upsampled,
                          const LiftedDiscriminator& d, const DiscriminatorConfig& cfg);

struct VoicingAwareConfig {
  DiscriminatorConfig voiced = DiscriminatorConfig::voiced();
  DiscriminatorConfig unvoiced = DiscriminatorConfig::unvoiced();

  void validate() const;
};

struct VoicingAwareParams {
  DiscriminatorParams voiced;
  DiscriminatorParams unvoiced;

  static VoicingAwareParams init(const VoicingAwareConfig& cfg, Rng& rng);
};

struct VoicingScores {
  Var v_real, v_fake;    // [B,1,T], already multiplied by the voiced mask
  Var uv_real, uv_fake;  // [B,1,T], multiplied by the unvoiced mask
};

// Routes mask-gated copies of both waveforms through the matching
// discriminator. x and xhat are [B,1,T] with B == 1; masks cover T samples.
VoicingScores voicing_aware_scores(Tape& tape, Var x, Var xhat, const Tensor& frames, int hop,
                                   const VoicingMasks& masks, const LiftedDiscriminator& d_v,
                                   const LiftedDiscriminator& d_uv,
                                   const VoicingAwareConfig& cfg);

}  // namespace vwgan

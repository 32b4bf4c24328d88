#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vwgan/features.hpp"
#include "vwgan/ops.hpp"
#include "vwgan/rng.hpp"

namespace vwgan {

struct GeneratorConfig {
  int layers = 30;
  int cycles = 3;
  int residual_ch = 64;
  int skip_ch = 64;
  int kernel = 5;
  int aux_dim = kFeatureDim;

  void validate() const;
  std::vector<int> dilations() const;  // 2^(i mod (layers/cycles))
  int receptive_field() const;         // 1 + (kernel-1) * sum(dilations)
};

struct ConvParam {
  Tensor w;  // [out, in, kernel]
  Tensor b;  // [out]
};

struct GeneratorParams {
  struct Layer {
    ConvParam dilated;  // [2C, C, K]
    ConvParam cond;     // [2C, aux, 1]
    ConvParam res;      // [C, C, 1]
    ConvParam skip;     // [S, C, 1]
  };
  ConvParam input;  // [C, 1, 1]
  std::vector<Layer> layers;
  ConvParam out1;  // [S, S, 1]
  ConvParam out2;  // [1, S, 1]

  static GeneratorParams init(const GeneratorConfig& cfg, Rng& rng);
  static GeneratorParams zeros(const GeneratorConfig& cfg);
};

// Enumerates every parameter tensor in a fixed order shared by the optimizer
// and the checkpoint format.
void visit_params(GeneratorParams& p, const std::function<void(const std::string&, Tensor&)>& fn);

struct LiftedConv {
  Var w, b;
};

struct LiftedGenerator {
  struct Layer {
    LiftedConv dilated, cond, res, skip;
  };
  LiftedConv input;
  std::vector<Layer> layers;
  LiftedConv out1, out2;
};

LiftedGenerator lift(Tape& tape, const GeneratorParams& p, bool requires_grad);

// Gradients of the lifted parameters in visit_params order.
std::vector<const Tensor*> lifted_grads(const Tape& tape, const LiftedGenerator& g);

// z: [batch, 1, time], h_upsampled: [batch, aux_dim, time] -> [batch, 1, time].
Var generator_forward(Tape& tape, Var z, const Tensor& h_upsampled, const LiftedGenerator& g,
                      const GeneratorConfig& cfg);

// Same network but conditioning is applied directly from feature frames
// [batch, aux_dim, n_frames] with time = n_frames * hop; avoids materializing
// the per-sample conditioner.
Var generator_forward_frames(Tape& tape, Var z, const Tensor& frames, int hop,
                             const LiftedGenerator& g, const GeneratorConfig& cfg);

}  // namespace vwgan

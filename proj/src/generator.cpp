#include "vwgan/generator.hpp"

#include <cmath>

namespace vwgan {

void GeneratorConfig::validate() const {
  if (layers <= 0 || cycles <= 0) throw ValueError("generator needs positive layers and cycles");
  if (layers % cycles != 0) {
    throw ValueError("generator layers (" + std::to_string(layers) +
                     ") must be divisible by cycles (" + std::to_string(cycles) + ")");
  }
  if (residual_ch <= 0 || skip_ch <= 0) throw ValueError("generator channels must be positive");
  if (kernel <= 0 || kernel % 2 == 0) throw ValueError("generator kernel must be odd");
  if (aux_dim <= 0) throw ValueError("generator aux_dim must be positive");
}

std::vector<int> GeneratorConfig::dilations() const {
  int per_cycle = layers / cycles;
  std::vector<int> d(layers);
  for (int i = 0; i < layers; i++) d[i] = 1 << (i % per_cycle);
  return d;
}

int GeneratorConfig::receptive_field() const {
  int sum = 0;
  for (int d : dilations()) sum += d;
  return 1 + (kernel - 1) * sum;
}

namespace {

ConvParam make_conv(int out_ch, int in_ch, int k, Rng& rng) {
  ConvParam p;
  p.w = Tensor({out_ch, in_ch, k});
  double std = 1.0 / std::sqrt(static_cast<double>(in_ch * k));
  for (double& v : p.w.data) v = rng.gaussian() * std;
  p.b = Tensor({out_ch});
  return p;
}

ConvParam zero_conv(int out_ch, int in_ch, int k) {
  ConvParam p;
  p.w = Tensor({out_ch, in_ch, k});
  p.b = Tensor({out_ch});
  return p;
}

}  // namespace

GeneratorParams GeneratorParams::init(const GeneratorConfig& cfg, Rng& rng) {
  cfg.validate();
  GeneratorParams p;
  int c = cfg.residual_ch, s = cfg.skip_ch;
  p.input = make_conv(c, 1, 1, rng);
  p.layers.resize(cfg.layers);
  for (int i = 0; i < cfg.layers; i++) {
    p.layers[i].dilated = make_conv(2 * c, c, cfg.kernel, rng);
    p.layers[i].cond = make_conv(2 * c, cfg.aux_dim, 1, rng);
    p.layers[i].res = make_conv(c, c, 1, rng);
    p.layers[i].skip = make_conv(s, c, 1, rng);
  }
  p.out1 = make_conv(s, s, 1, rng);
  p.out2 = make_conv(1, s, 1, rng);
  return p;
}

GeneratorParams GeneratorParams::zeros(const GeneratorConfig& cfg) {
  cfg.validate();
  GeneratorParams p;
  int c = cfg.residual_ch, s = cfg.skip_ch;
  p.input = zero_conv(c, 1, 1);
  p.layers.resize(cfg.layers);
  for (int i = 0; i < cfg.layers; i++) {
    p.layers[i].dilated = zero_conv(2 * c, c, cfg.kernel);
    p.layers[i].cond = zero_conv(2 * c, cfg.aux_dim, 1);
    p.layers[i].res = zero_conv(c, c, 1);
    p.layers[i].skip = zero_conv(s, c, 1);
  }
  p.out1 = zero_conv(s, s, 1);
  p.out2 = zero_conv(1, s, 1);
  return p;
}

void visit_params(GeneratorParams& p,
                  const std::function<void(const std::string&, Tensor&)>& fn) {
  auto conv = [&](const std::string& name, ConvParam& c) {
    fn(name + "/w", c.w);
    fn(name + "/b", c.b);
  };
  conv("input", p.input);
  for (size_t i = 0; i < p.layers.size(); i++) {
    std::string tag = "layer" + std::to_string(i);
    conv(tag + "/dilated", p.layers[i].dilated);
    conv(tag + "/cond", p.layers[i].cond);
    conv(tag + "/res", p.layers[i].res);
    conv(tag + "/skip", p.layers[i].skip);
  }
  conv("out1", p.out1);
  conv("out2", p.out2);
}

LiftedGenerator lift(Tape& tape, const GeneratorParams& p, bool requires_grad) {
  auto lc = [&](const ConvParam& c) {
    return LiftedConv{tape.leaf(c.w, requires_grad), tape.leaf(c.b, requires_grad)};
  };
  LiftedGenerator g;
  g.input = lc(p.input);
  g.layers.resize(p.layers.size());
  for (size_t i = 0; i < p.layers.size(); i++) {
    g.layers[i].dilated = lc(p.layers[i].dilated);
    g.layers[i].cond = lc(p.layers[i].cond);
    g.layers[i].res = lc(p.layers[i].res);
    g.layers[i].skip = lc(p.layers[i].skip);
  }
  g.out1 = lc(p.out1);
  g.out2 = lc(p.out2);
  return g;
}

std::vector<const Tensor*> lifted_grads(const Tape& tape, const LiftedGenerator& g) {
  std::vector<const Tensor*> out;
  auto conv = [&](const LiftedConv& c) {
    out.push_back(&tape.grad(c.w));
    out.push_back(&tape.grad(c.b));
  };
  conv(g.input);
  for (const auto& l : g.layers) {
    conv(l.dilated);
    conv(l.cond);
    conv(l.res);
    conv(l.skip);
  }
  conv(g.out1);
  conv(g.out2);
  return out;
}

namespace {

// cond_proj(layer index) must return the conditioning projection [B, 2C, T].
Var generator_core(Tape& tape, Var z, const LiftedGenerator& g, const GeneratorConfig& cfg,
                   const std::function<Var(int)>& cond_proj) {
  const Tensor& zv = tape.val(z);
  if (zv.rank() != 3 || zv.dim(1) != 1) {
    throw ShapeError("generator_forward: z must be [batch, 1, time], got " + shape_str(zv.shape));
  }
  std::vector<int> dil = cfg.dilations();
  int c = cfg.residual_ch;
  Var x = ops::conv1d(z, g.input.w, g.input.b, 1);
  Var skips;
  bool first = true;
  for (int i = 0; i < cfg.layers; i++) {
    Var pre = ops::conv1d(x, g.layers[i].dilated.w, g.layers[i].dilated.b, dil[i]);
    pre = ops::add(pre, cond_proj(i));
    Var a = ops::slice_channels(pre, 0, c);
    Var gate = ops::slice_channels(pre, c, 2 * c);
    Var gated = ops::mul(ops::tanh(a), ops::sigmoid(gate));
    Var res = ops::conv1d(gated, g.layers[i].res.w, g.layers[i].res.b, 1);
    x = ops::add(x, res);
    Var s = ops::conv1d(gated, g.layers[i].skip.w, g.layers[i].skip.b, 1);
    skips = first ? s : ops::add(skips, s);
    first = false;
  }
  Var out = ops::relu(skips);
  out = ops::conv1d(out, g.out1.w, g.out1.b, 1);
  out = ops::relu(out);
  out = ops::conv1d(out, g.out2.w, g.out2.b, 1);
  return out;
}

}  // namespace

Var generator_forward(Tape& tape, Var z, const Tensor& h_upsampled, const LiftedGenerator& g,
                      const GeneratorConfig& cfg) {
  cfg.validate();
  const Tensor& zv = tape.val(z);
  if (h_upsampled.rank() != 3 || h_upsampled.dim(1) != cfg.aux_dim) {
    throw ShapeError("generator_forward: h must be [batch, aux_dim, time], got " +
                     shape_str(h_upsampled.shape));
  }
  if (zv.rank() == 3 &&
      (h_upsampled.dim(0) != zv.dim(0) || h_upsampled.dim(2) != zv.dim(2))) {
    throw ShapeError("generator_forward: z is " + shape_str(zv.shape) + " but h is " +
                     shape_str(h_upsampled.shape));
  }
  Var h = tape.leaf(h_upsampled, false);
  return generator_core(tape, z, g, cfg, [&](int i) {
    return ops::conv1d(h, g.layers[i].cond.w, g.layers[i].cond.b, 1);
  });
}

Var generator_forward_frames(Tape& tape, Var z, const Tensor& frames, int hop,
                             const LiftedGenerator& g, const GeneratorConfig& cfg) {
  cfg.validate();
  const Tensor& zv = tape.val(z);
  if (frames.rank() != 3 || frames.dim(1) != cfg.aux_dim) {
    throw ShapeError("generator_forward_frames: frames must be [batch, aux_dim, n_frames], got " +
                     shape_str(frames.shape));
  }
  if (hop <= 0) throw ValueError("generator_forward_frames: hop must be positive");
  if (zv.rank() == 3 &&
      (frames.dim(0) != zv.dim(0) || frames.dim(2) * hop != zv.dim(2))) {
    throw ShapeError("generator_forward_frames: z time " + std::to_string(zv.dim(2)) +
                     " != n_frames * hop = " + std::to_string(frames.dim(2) * hop));
  }
  return generator_core(tape, z, g, cfg, [&](int i) {
    return ops::frame_conv(g.layers[i].cond.w, g.layers[i].cond.b, frames, hop);
  });
}

}  // namespace vwgan

#include "vwgan/discriminator.hpp"

#include <cmath>

namespace vwgan {

int receptive_field(int kernel, const std::vector<int>& dilations) {
  int sum = 0;
  for (int d : dilations) {
    if (d <= 0) throw ValueError("receptive_field: dilations must be positive");
    sum += d;
  }
  return 1 + (kernel - 1) * sum;
}

void DiscriminatorConfig::validate() const {
  if (conv_layers <= 0) throw ValueError("discriminator needs at least one conv layer");
  if (static_cast<int>(dilations.size()) != conv_layers) {
    throw ValueError("discriminator has " + std::to_string(dilations.size()) +
                     " dilations for " + std::to_string(conv_layers) + " layers");
  }
  if (channels <= 0) throw ValueError("discriminator channels must be positive");
  if (kernel <= 0 || kernel % 2 == 0) throw ValueError("discriminator kernel must be odd");
  if (leaky_alpha < 0.0 || leaky_alpha >= 1.0) {
    throw ValueError("discriminator leaky_alpha must be in [0, 1)");
  }
  if (conditional && aux_dim <= 0) throw ValueError("discriminator aux_dim must be positive");
  for (int d : dilations) {
    if (d <= 0) throw ValueError("discriminator dilations must be positive");
  }
}

int DiscriminatorConfig::receptive_field() const { return vwgan::receptive_field(kernel, dilations); }

DiscriminatorConfig DiscriminatorConfig::voiced(int channels, int aux_dim) {
  DiscriminatorConfig c;
  c.channels = channels;
  c.aux_dim = aux_dim;
  return c;
}

DiscriminatorConfig DiscriminatorConfig::unvoiced(int channels, int aux_dim) {
  DiscriminatorConfig c;
  c.channels = channels;
  c.aux_dim = aux_dim;
  c.dilations = {1, 1, 1, 1, 1, 1};
  return c;
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

}  // namespace

DiscriminatorParams DiscriminatorParams::init(const DiscriminatorConfig& cfg, Rng& rng) {
  cfg.validate();
  DiscriminatorParams p;
  int c = cfg.channels;
  p.stack.reserve(cfg.conv_layers);
  for (int i = 0; i < cfg.conv_layers; i++) {
    p.stack.push_back(make_conv(c, i == 0 ? 1 : c, cfg.kernel, rng));
  }
  p.out = make_conv(1, c, 1, rng);
  if (cfg.conditional) p.cond = make_conv(c, cfg.aux_dim, cfg.receptive_field(), rng);
  return p;
}

DiscriminatorParams DiscriminatorParams::zeros(const DiscriminatorConfig& cfg) {
  cfg.validate();
  DiscriminatorParams p;
  int c = cfg.channels;
  for (int i = 0; i < cfg.conv_layers; i++) {
    ConvParam layer;
    layer.w = Tensor({c, i == 0 ? 1 : c, cfg.kernel});
    layer.b = Tensor({c});
    p.stack.push_back(std::move(layer));
  }
  p.out.w = Tensor({1, c, 1});
  p.out.b = Tensor({1});
  if (cfg.conditional) {
    p.cond.w = Tensor({c, cfg.aux_dim, cfg.receptive_field()});
    p.cond.b = Tensor({c});
  }
  return p;
}

void visit_params(DiscriminatorParams& p,
                  const std::function<void(const std::string&, Tensor&)>& fn) {
  for (size_t i = 0; i < p.stack.size(); i++) {
    std::string tag = "stack" + std::to_string(i);
    fn(tag + "/w", p.stack[i].w);
    fn(tag + "/b", p.stack[i].b);
  }
  fn("out/w", p.out.w);
  fn("out/b", p.out.b);
  if (p.cond.w.numel() > 0) {
    fn("cond/w", p.cond.w);
    fn("cond/b", p.cond.b);
  }
}

LiftedDiscriminator lift(Tape& tape, const DiscriminatorParams& p,
                         const DiscriminatorConfig& cfg, bool requires_grad) {
  auto lc = [&](const ConvParam& c) {
    return LiftedConv{tape.leaf(c.w, requires_grad), tape.leaf(c.b, requires_grad)};
  };
  LiftedDiscriminator d;
  for (const auto& layer : p.stack) d.stack.push_back(lc(layer));
  d.out = lc(p.out);
  d.conditional = cfg.conditional;
  if (cfg.conditional) {
    if (p.cond.w.numel() == 0) {
      throw ValueError("conditional discriminator is missing its conditioning parameters");
    }
    d.cond = lc(p.cond);
  }
  return d;
}

std::vector<const Tensor*> lifted_grads(const Tape& tape, const LiftedDiscriminator& d) {
  std::vector<const Tensor*> out;
  auto conv = [&](const LiftedConv& c) {
    out.push_back(&tape.grad(c.w));
    out.push_back(&tape.grad(c.b));
  };
  for (const auto& layer : d.stack) conv(layer);
  conv(d.out);
  if (d.conditional) conv(d.cond);
  return out;
}

Var discriminator_features(Tape& tape, Var wave, const LiftedDiscriminator& d,
                           const DiscriminatorConfig& cfg) {
  const Tensor& wv = tape.val(wave);
  if (wv.rank() != 3 || wv.dim(1) != 1) {
    throw ShapeError("discriminator_features: wave must be [batch, 1, time], got " +
                     shape_str(wv.shape));
  }
  Var x = wave;
  for (int i = 0; i < cfg.conv_layers; i++) {
    x = ops::conv1d(x, d.stack[i].w, d.stack[i].b, cfg.dilations[i]);
    x = ops::leaky_relu(x, cfg.leaky_alpha);
  }
  return x;
}

Var condition_embedding(Tape& tape, const Tensor& h_upsampled, const LiftedDiscriminator& d,
                        const DiscriminatorConfig& cfg) {
  if (!cfg.conditional) throw ValueError("condition_embedding on an unconditional discriminator");
  if (h_upsampled.rank() != 3 || h_upsampled.dim(1) != cfg.aux_dim) {
    throw ShapeError("condition_embedding: h must be [batch, aux_dim, time], got " +
                     shape_str(h_upsampled.shape));
  }
  Var h = tape.leaf(h_upsampled, false);
  return ops::conv1d(h, d.cond.w, d.cond.b, 1);
}

Var condition_embedding_frames(Tape& tape, const Tensor& frames, int hop,
                               const LiftedDiscriminator& d, const DiscriminatorConfig& cfg) {
  if (!cfg.conditional) throw ValueError("condition_embedding on an unconditional discriminator");
  if (frames.rank() != 3 || frames.dim(1) != cfg.aux_dim) {
    throw ShapeError("condition_embedding_frames: frames must be [batch, aux_dim, n_frames], got " +
                     shape_str(frames.shape));
  }
  (void)tape;
  return ops::frame_conv(d.cond.w, d.cond.b, frames, hop);
}

Tensor condition_embedding_value(const DiscriminatorParams& p, const Tensor& frames, int hop,
                                 const DiscriminatorConfig& cfg) {
  if (!cfg.conditional) throw ValueError("condition_embedding on an unconditional discriminator");
  int b = frames.dim(0), f = frames.dim(2);
  int co = p.cond.w.dim(0), ci = p.cond.w.dim(1), k = p.cond.w.dim(2);
  if (ci != cfg.aux_dim) {
    throw ShapeError("condition_embedding_value: frames have " + std::to_string(frames.dim(1)) +
                     " channels, weight expects " + std::to_string(ci));
  }
  Tensor out({b, co, f * hop});
  kernels::frame_conv_forward(out.ptr(), frames.ptr(), p.cond.w.ptr(), p.cond.b.ptr(), b, ci, co,
                              f, hop, f * hop, k);
  return out;
}

Tensor discriminator_score_value(const DiscriminatorParams& p, const DiscriminatorConfig& cfg,
                                 const Tensor& wave, const Tensor& c) {
  cfg.validate();
  if (wave.rank() != 3 || wave.dim(1) != 1)
    throw ShapeError("discriminator_score_value: wave must be [B,1,T], got " +
                     shape_str(wave.shape));
  const int B = wave.dim(0), T = wave.dim(2), C = cfg.channels;
  Tensor cur = wave, next;
  for (int i = 0; i < cfg.conv_layers; i++) {
    const ConvParam& layer = p.stack[i];
    next = Tensor({B, C, T});
    kernels::conv1d_forward(next.ptr(), cur.ptr(), layer.w.ptr(), layer.b.ptr(), B, cur.dim(1), C,
                            T, cfg.kernel, cfg.dilations[i]);
    for (double& v : next.data)
      if (v < 0.0) v *= cfg.leaky_alpha;
    cur = std::move(next);
  }
  Tensor score({B, 1, T});
  kernels::conv1d_forward(score.ptr(), cur.ptr(), p.out.w.ptr(), p.out.b.ptr(), B, C, 1, T, 1, 1);
  if (cfg.conditional) {
    if (c.shape != cur.shape)
      throw ShapeError("discriminator_score_value: embedding is " + shape_str(c.shape) +
                       ", features are " + shape_str(cur.shape));
    for (int b = 0; b < B; b++) {
      double* s = score.row(b, 0);
      for (int ch = 0; ch < C; ch++) {
        const double* pr = cur.row(b, ch);
        const double* cr = c.row(b, ch);
        for (int t = 0; t < T; t++) s[t] += pr[t] * cr[t];
      }
    }
  }
  return score;
}

Var base_score(Tape& tape, Var psi, const LiftedDiscriminator& d) {
  (void)tape;
  return ops::conv1d(psi, d.out.w, d.out.b, 1);
}

Var projection_score(Tape& tape, Var psi, const LiftedDiscriminator& d, Var c) {
  Var base = base_score(tape, psi, d);
  return ops::add(base, ops::sum_channels(ops::mul(psi, c)));
}

Var projection_score_const(Tape& tape, Var psi, const LiftedDiscriminator& d, const Tensor& c) {
  Var base = base_score(tape, psi, d);
  const Tensor& pv = tape.val(psi);
  if (c.shape != pv.shape) {
    throw ShapeError("projection_score: embedding is " + shape_str(c.shape) + ", features are " +
                     shape_str(pv.shape));
  }
  return ops::add(base, ops::sum_channels(ops::mul_const(psi, c)));
}

Var discriminator_forward(Tape& tape, Var wave, const Tensor* h_upsampled,
                          const LiftedDiscriminator& d, const DiscriminatorConfig& cfg) {
  cfg.validate();
  Var psi = discriminator_features(tape, wave, d, cfg);
  Var score;
  if (cfg.conditional) {
    if (h_upsampled == nullptr) {
      throw ValueError("discriminator_forward: conditional discriminator needs h");
    }
    const Tensor& wv = tape.val(wave);
    if (h_upsampled->rank() != 3 || h_upsampled->dim(0) != wv.dim(0) ||
        h_upsampled->dim(2) != wv.dim(2)) {
      throw ShapeError("discriminator_forward: wave is " + shape_str(wv.shape) + " but h is " +
                       shape_str(h_upsampled->shape));
    }
    Var c = condition_embedding(tape, *h_upsampled, d, cfg);
    score = projection_score(tape, psi, d, c);
  } else {
    score = base_score(tape, psi, d);
  }
  const Tensor& sv = tape.val(score);
  return ops::reshape(score, {sv.dim(0), sv.dim(2)});
}

void VoicingAwareConfig::validate() const {
  voiced.validate();
  unvoiced.validate();
  if (voiced.aux_dim != unvoiced.aux_dim) {
    throw ValueError("voiced and unvoiced discriminators must share aux_dim");
  }
}

VoicingAwareParams VoicingAwareParams::init(const VoicingAwareConfig& cfg, Rng& rng) {
  VoicingAwareParams p;
  p.voiced = DiscriminatorParams::init(cfg.voiced, rng);
  p.unvoiced = DiscriminatorParams::init(cfg.unvoiced, rng);
  return p;
}

namespace {

Tensor mask_b1t(const std::vector<double>& m) {
  Tensor t({1, 1, static_cast<int>(m.size())});
  t.data = m;
  return t;
}

}  // namespace

VoicingScores voicing_aware_scores(Tape& tape, Var x, Var xhat, const Tensor& frames, int hop,
                                   const VoicingMasks& masks, const LiftedDiscriminator& d_v,
                                   const LiftedDiscriminator& d_uv,
                                   const VoicingAwareConfig& cfg) {
  cfg.validate();
  const Tensor& xv = tape.val(x);
  const Tensor& xhv = tape.val(xhat);
  if (xv.rank() != 3 || xv.dim(0) != 1 || xv.dim(1) != 1) {
    throw ShapeError("voicing_aware_scores: x must be [1, 1, time], got " + shape_str(xv.shape));
  }
  if (xhv.shape != xv.shape) {
    throw ShapeError("voicing_aware_scores: xhat is " + shape_str(xhv.shape) + ", x is " +
                     shape_str(xv.shape));
  }
  if (static_cast<int64_t>(masks.n_samples()) != static_cast<int64_t>(xv.dim(2))) {
    throw ShapeError("voicing_aware_scores: masks cover " + std::to_string(masks.n_samples()) +
                     " samples, waveform has " + std::to_string(xv.dim(2)));
  }

  auto branch = [&](const std::vector<double>& mask_vec, const LiftedDiscriminator& d,
                    const DiscriminatorConfig& dcfg, Var& real_out, Var& fake_out) {
    Tensor mask = mask_b1t(mask_vec);
    Var psi_r = discriminator_features(tape, ops::mul_const(x, mask), d, dcfg);
    Var psi_f = discriminator_features(tape, ops::mul_const(xhat, mask), d, dcfg);
    Var sr, sf;
    if (dcfg.conditional) {
      Var c = condition_embedding_frames(tape, frames, hop, d, dcfg);
      sr = projection_score(tape, psi_r, d, c);
      sf = projection_score(tape, psi_f, d, c);
    } else {
      sr = base_score(tape, psi_r, d);
      sf = base_score(tape, psi_f, d);
    }
    real_out = ops::mul_const(sr, mask);
    fake_out = ops::mul_const(sf, mask);
  };

  VoicingScores s;
  branch(masks.v, d_v, cfg.voiced, s.v_real, s.v_fake);
  branch(masks.uv, d_uv, cfg.unvoiced, s.uv_real, s.uv_fake);
  return s;
}

}  // namespace vwgan

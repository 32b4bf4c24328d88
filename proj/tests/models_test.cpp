#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "vwgan/discriminator.hpp"
#include "vwgan/generator.hpp"
#include "vwgan/losses.hpp"
#include "vwgan/rng.hpp"
#include "vwgan/upsample.hpp"

using namespace vwgan;

namespace {

Tensor random_tensor(std::vector<int> shape, uint64_t seed, double scale = 0.5) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.gaussian() * scale;
  return t;
}

GeneratorConfig small_gen() {
  GeneratorConfig g;
  g.layers = 4;
  g.cycles = 2;
  g.residual_ch = 8;
  g.skip_ch = 8;
  g.kernel = 3;
  g.aux_dim = 5;
  return g;
}

DiscriminatorConfig small_disc(bool conditional) {
  DiscriminatorConfig d;
  d.conv_layers = 3;
  d.channels = 8;
  d.dilations = {1, 2, 4};
  d.conditional = conditional;
  d.aux_dim = 5;
  return d;
}

// Set of output positions whose score changes when the input is perturbed at
// one sample; for a non-causal stack this is the receptive-field window.
std::set<int> influenced_positions(const DiscriminatorParams& p, const DiscriminatorConfig& cfg,
                                   Tensor wave, int probe) {
  const Tensor base = discriminator_score_value(p, cfg, wave, Tensor{});
  wave[probe] += 0.5;
  const Tensor poked = discriminator_score_value(p, cfg, wave, Tensor{});
  std::set<int> changed;
  for (int64_t i = 0; i < base.numel(); i++)
    if (base[i] != poked[i]) changed.insert(static_cast<int>(i));
  return changed;
}

}  // namespace

TEST_CASE("receptive field arithmetic") {
  CHECK(receptive_field(3, {1, 2, 4, 8, 16, 32}) == 127);
  CHECK(receptive_field(3, {1, 1, 1, 1, 1, 1}) == 13);
  CHECK(receptive_field(5, {1}) == 5);

  CHECK(DiscriminatorConfig::voiced().receptive_field() == 127);
  CHECK(DiscriminatorConfig::voiced().dilations == std::vector<int>{1, 2, 4, 8, 16, 32});
  CHECK(DiscriminatorConfig::unvoiced().receptive_field() == 13);
  CHECK(DiscriminatorConfig::unvoiced().dilations == std::vector<int>{1, 1, 1, 1, 1, 1});

  GeneratorConfig paper;  // 30 layers, 3 cycles, kernel 5
  CHECK(paper.receptive_field() == 12277);
  const auto dil = paper.dilations();
  REQUIRE(dil.size() == 30);
  CHECK(dil[0] == 1);
  CHECK(dil[9] == 512);
  CHECK(dil[10] == 1);
  CHECK(dil[29] == 512);

  GeneratorConfig desk;
  desk.layers = 10;
  desk.cycles = 2;
  desk.kernel = 3;
  desk.residual_ch = 16;
  desk.skip_ch = 16;
  CHECK(desk.receptive_field() == 125);
}

// Acceptance criterion 1: the measured receptive fields of the two desk
// discriminators match the dilation sums: 127 (voiced) and 13 (unvoiced).
TEST_CASE("discriminator receptive fields measured by probing") {
  struct Case {
    DiscriminatorConfig cfg;
    int rf;
  };
  Case cases[] = {{DiscriminatorConfig::voiced(16), 127}, {DiscriminatorConfig::unvoiced(16), 13}};
  for (auto& [cfg, rf] : cases) {
    cfg.conditional = false;  // probe the dilated stack in isolation
    Rng rng(900 + rf);
    const DiscriminatorParams p = DiscriminatorParams::init(cfg, rng);
    const int T = 256, probe = T / 2, half = (rf - 1) / 2;
    const auto changed = influenced_positions(p, cfg, random_tensor({1, 1, T}, 7), probe);
    REQUIRE(!changed.empty());
    CHECK(*changed.begin() == probe - half);
    CHECK(*changed.rbegin() == probe + half);
    CHECK(static_cast<int>(changed.size()) == rf);
  }
}

TEST_CASE("model configuration validation") {
  GeneratorConfig g = small_gen();
  CHECK_NOTHROW(g.validate());
  g.layers = 5;  // not divisible by cycles
  CHECK_THROWS_AS(g.validate(), ValueError);
  g = small_gen();
  g.kernel = 4;
  CHECK_THROWS_AS(g.validate(), ValueError);

  DiscriminatorConfig d = small_disc(true);
  CHECK_NOTHROW(d.validate());
  d.dilations = {1, 2};  // count mismatch
  CHECK_THROWS_AS(d.validate(), ValueError);
  d = small_disc(true);
  d.leaky_alpha = 1.0;
  CHECK_THROWS_AS(d.validate(), ValueError);
}

TEST_CASE("parameter initialization and traversal") {
  const GeneratorConfig gcfg = small_gen();
  Rng rng(1);
  GeneratorParams gp = GeneratorParams::init(gcfg, rng);
  CHECK(gp.input.w.shape == std::vector<int>{8, 1, 1});
  CHECK(gp.layers[0].dilated.w.shape == std::vector<int>{16, 8, 3});
  CHECK(gp.layers[0].cond.w.shape == std::vector<int>{16, 5, 1});
  CHECK(gp.layers[0].res.w.shape == std::vector<int>{8, 8, 1});
  CHECK(gp.layers[0].skip.w.shape == std::vector<int>{8, 8, 1});
  CHECK(gp.out2.w.shape == std::vector<int>{1, 8, 1});
  for (double b : gp.input.b.data) CHECK(b == 0.0);
  for (double b : gp.layers[2].dilated.b.data) CHECK(b == 0.0);

  std::set<std::string> names;
  int count = 0;
  visit_params(gp, [&](const std::string& n, Tensor&) {
    names.insert(n);
    count++;
  });
  CHECK(count == 2 * (1 + 4 * gcfg.layers + 2));
  CHECK(static_cast<int>(names.size()) == count);  // all names distinct

  GeneratorParams gz = GeneratorParams::zeros(gcfg);
  for (double v : gz.layers[1].dilated.w.data) CHECK(v == 0.0);

  const DiscriminatorConfig dc = small_disc(true);
  DiscriminatorParams dp = DiscriminatorParams::init(dc, rng);
  CHECK(dp.stack[0].w.shape == std::vector<int>{8, 1, 3});
  CHECK(dp.stack[1].w.shape == std::vector<int>{8, 8, 3});
  CHECK(dp.out.w.shape == std::vector<int>{1, 8, 1});
  CHECK(dp.cond.w.shape == std::vector<int>{8, 5, dc.receptive_field()});
  int dcount = 0;
  visit_params(dp, [&](const std::string&, Tensor&) { dcount++; });
  CHECK(dcount == 2 * (3 + 2));

  DiscriminatorParams du = DiscriminatorParams::init(small_disc(false), rng);
  CHECK(du.cond.w.numel() == 0);
  int ucount = 0;
  visit_params(du, [&](const std::string&, Tensor&) { ucount++; });
  CHECK(ucount == 2 * (3 + 1));
}

TEST_CASE("lifted gradient views line up with parameters") {
  const GeneratorConfig cfg = small_gen();
  Rng rng(3);
  GeneratorParams p = GeneratorParams::init(cfg, rng);
  Tape tape;
  LiftedGenerator g = lift(tape, p, true);
  const int T = 40;
  Var z = tape.leaf(random_tensor({1, 1, T}, 4));
  Tensor h = random_tensor({1, cfg.aux_dim, T}, 5);
  tape.backward(ops::sum(generator_forward(tape, z, h, g, cfg)));
  const auto grads = lifted_grads(tape, g);
  int n_params = 0;
  visit_params(p, [&](const std::string&, Tensor&) { n_params++; });
  REQUIRE(static_cast<int>(grads.size()) == n_params);
  size_t idx = 0;
  visit_params(p, [&](const std::string&, Tensor& t) {
    CHECK(grads[idx]->shape == t.shape);
    idx++;
  });
  // Every layer receives some gradient from the scalar objective.
  double total = 0.0;
  for (const Tensor* g2 : grads)
    for (double v : g2->data) total += std::abs(v);
  CHECK(total > 0.0);
}

TEST_CASE("generator frame conditioning matches upsampled conditioning") {
  const GeneratorConfig cfg = small_gen();
  Rng rng(8);
  const GeneratorParams p = GeneratorParams::init(cfg, rng);
  const int F = 6, hop = 10, T = F * hop;
  ConditionFeatures feat;
  feat.frames = random_tensor({F, cfg.aux_dim}, 9);
  feat.vuv.assign(F, 1);
  const Tensor h = upsample_features(feat, hop);  // [aux, T]
  Tensor h3({1, cfg.aux_dim, T});
  h3.data = h.data;
  Tensor frames3({1, cfg.aux_dim, F});
  for (int c = 0; c < cfg.aux_dim; c++)
    for (int f = 0; f < F; f++) frames3.ptr()[c * F + f] = feat.frames.ptr()[f * cfg.aux_dim + c];

  Tape tape;
  LiftedGenerator g = lift(tape, p, false);
  Var z = tape.leaf(random_tensor({1, 1, T}, 10));
  const Tensor dense = tape.val(generator_forward(tape, z, h3, g, cfg));
  const Tensor framed = tape.val(generator_forward_frames(tape, z, frames3, hop, g, cfg));
  REQUIRE(dense.shape == framed.shape);
  REQUIRE(dense.shape == std::vector<int>{1, 1, T});
  double worst = 0.0;
  for (int64_t i = 0; i < dense.numel(); i++)
    worst = std::max(worst, std::abs(dense[i] - framed[i]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("projection conditioning decomposes into base plus inner product") {
  const DiscriminatorConfig cfg = small_disc(true);
  Rng rng(20);
  const DiscriminatorParams p = DiscriminatorParams::init(cfg, rng);
  const int F = 8, hop = 5, T = F * hop;
  const Tensor wave = random_tensor({1, 1, T}, 21);
  const Tensor frames = random_tensor({1, cfg.aux_dim, F}, 22);
  Tensor h({1, cfg.aux_dim, T});
  for (int c = 0; c < cfg.aux_dim; c++)
    for (int t = 0; t < T; t++) h.ptr()[c * T + t] = frames.ptr()[c * F + t / hop];

  Tape tape;
  LiftedDiscriminator d = lift(tape, p, cfg, false);
  Var psi = discriminator_features(tape, tape.leaf(wave), d, cfg);
  Var c = condition_embedding(tape, h, d, cfg);
  const Tensor psi_v = tape.val(psi);
  const Tensor c_v = tape.val(c);
  const Tensor base_v = tape.val(base_score(tape, psi, d));
  const Tensor score_v = tape.val(projection_score(tape, psi, d, c));
  REQUIRE(score_v.shape == std::vector<int>{1, 1, T});
  REQUIRE(psi_v.shape == std::vector<int>{1, cfg.channels, T});

  for (int t = 0; t < T; t++) {
    double dot = 0.0;
    for (int ch = 0; ch < cfg.channels; ch++) dot += psi_v.ptr()[ch * T + t] * c_v.ptr()[ch * T + t];
    CHECK(score_v[t] == doctest::Approx(base_v[t] + dot).epsilon(1e-12));
  }

  // The frame-rate embedding route and the no-tape value route agree with the
  // dense path.
  const Tensor c_frames = tape.val(condition_embedding_frames(tape, frames, hop, d, cfg));
  const Tensor c_value = condition_embedding_value(p, frames, hop, cfg);
  REQUIRE(c_frames.shape == c_v.shape);
  REQUIRE(c_value.shape == c_v.shape);
  for (int64_t i = 0; i < c_v.numel(); i++) {
    CHECK(c_frames[i] == doctest::Approx(c_v[i]).epsilon(1e-9));
    CHECK(c_value[i] == c_frames[i]);
  }

  // discriminator_forward wraps the same computation, reshaped to [B, T].
  const Tensor fwd = tape.val(discriminator_forward(tape, tape.leaf(wave), &h, d, cfg));
  REQUIRE(fwd.shape == std::vector<int>{1, T});
  for (int t = 0; t < T; t++) CHECK(fwd[t] == score_v[t]);

  // Score values through the tape-free path match the tape path.
  const Tensor direct = discriminator_score_value(p, cfg, wave, c_value);
  for (int t = 0; t < T; t++) CHECK(direct[t] == doctest::Approx(score_v[t]).epsilon(1e-12));

  CHECK_THROWS_AS(discriminator_forward(tape, tape.leaf(wave), nullptr, d, cfg), ValueError);
}

TEST_CASE("unconditional score is the base head only") {
  const DiscriminatorConfig cfg = small_disc(false);
  Rng rng(30);
  const DiscriminatorParams p = DiscriminatorParams::init(cfg, rng);
  const Tensor wave = random_tensor({1, 1, 32}, 31);
  Tape tape;
  LiftedDiscriminator d = lift(tape, p, cfg, false);
  Var psi = discriminator_features(tape, tape.leaf(wave), d, cfg);
  const Tensor base_v = tape.val(base_score(tape, psi, d));
  const Tensor fwd = tape.val(discriminator_forward(tape, tape.leaf(wave), nullptr, d, cfg));
  for (int64_t t = 0; t < fwd.numel(); t++) CHECK(fwd[t] == base_v[t]);
}

TEST_CASE("voicing aware scores gate by mask and reuse the branch networks") {
  VoicingAwareConfig cfg;
  cfg.voiced = small_disc(true);
  cfg.unvoiced = small_disc(true);
  cfg.unvoiced.dilations = {1, 1, 1};
  Rng rng(40);
  const VoicingAwareParams p = VoicingAwareParams::init(cfg, rng);

  const int F = 10, hop = 4, T = F * hop;
  std::vector<uint8_t> vuv = {1, 1, 0, 0, 1, 0, 1, 1, 0, 0};
  const VoicingMasks masks = upsample_vuv(vuv, hop);
  const Tensor x = random_tensor({1, 1, T}, 41);
  const Tensor xhat = random_tensor({1, 1, T}, 42);
  const Tensor frames = random_tensor({1, cfg.voiced.aux_dim, F}, 43);

  Tape tape;
  LiftedDiscriminator dv = lift(tape, p.voiced, cfg.voiced, false);
  LiftedDiscriminator duv = lift(tape, p.unvoiced, cfg.unvoiced, false);
  VoicingScores s =
      voicing_aware_scores(tape, tape.leaf(x), tape.leaf(xhat), frames, hop, masks, dv, duv, cfg);
  const Tensor vr = tape.val(s.v_real);
  const Tensor vf = tape.val(s.v_fake);
  const Tensor ur = tape.val(s.uv_real);
  const Tensor uf = tape.val(s.uv_fake);
  REQUIRE(vr.shape == std::vector<int>{1, 1, T});

  // Masked positions carry an exact zero score on the matching branch.
  for (int t = 0; t < T; t++) {
    if (masks.v[static_cast<size_t>(t)] == 0.0) {
      CHECK(vr[t] == 0.0);
      CHECK(vf[t] == 0.0);
    } else {
      CHECK(ur[t] == 0.0);
      CHECK(uf[t] == 0.0);
    }
  }

  // Active positions match an independent recomputation: score the masked
  // waveform with the branch network, then gate the result.
  Tensor x_masked = x;
  for (int t = 0; t < T; t++) x_masked[t] *= masks.v[static_cast<size_t>(t)];
  const Tensor c_v = condition_embedding_value(p.voiced, frames, hop, cfg.voiced);
  const Tensor sv = discriminator_score_value(p.voiced, cfg.voiced, x_masked, c_v);
  for (int t = 0; t < T; t++) {
    if (masks.v[static_cast<size_t>(t)] == 1.0)
      CHECK(vr[t] == doctest::Approx(sv[t]).epsilon(1e-12));
  }
}

// Acceptance criterion 4: gradients w.r.t. the waveform vanish identically in
// masked-out regions, across random model instances and voicing patterns.
TEST_CASE("masked regions receive exactly zero waveform gradient") {
  for (int trial = 0; trial < 10; trial++) {
    VoicingAwareConfig cfg;
    cfg.voiced = small_disc(true);
    cfg.unvoiced = small_disc(true);
    cfg.unvoiced.dilations = {1, 1, 1};
    Rng rng(100 + static_cast<uint64_t>(trial));
    const VoicingAwareParams p = VoicingAwareParams::init(cfg, rng);

    const int F = 8, hop = 5, T = F * hop;
    std::vector<uint8_t> vuv(F);
    bool any_v = false, any_uv = false;
    for (int f = 0; f < F; f++) {
      vuv[static_cast<size_t>(f)] = rng.uniform(0.0, 1.0) < 0.5 ? 0 : 1;
      (vuv[static_cast<size_t>(f)] ? any_v : any_uv) = true;
    }
    if (!any_v) vuv[0] = 1;
    if (!any_uv) vuv[1] = 0;
    const VoicingMasks masks = upsample_vuv(vuv, hop);

    Tensor xt({1, 1, T}), xh({1, 1, T});
    for (double& v : xt.data) v = rng.gaussian() * 0.5;
    for (double& v : xh.data) v = rng.gaussian() * 0.5;
    const Tensor frames = random_tensor({1, cfg.voiced.aux_dim, F}, 200 + trial);

    for (int side = 0; side < 2; side++) {  // 0: voiced objective, 1: unvoiced
      Tape tape;
      LiftedDiscriminator dv = lift(tape, p.voiced, cfg.voiced, false);
      LiftedDiscriminator duv = lift(tape, p.unvoiced, cfg.unvoiced, false);
      Var x = tape.leaf(xt, true);
      Var xhat = tape.leaf(xh, true);
      VoicingScores s = voicing_aware_scores(tape, x, xhat, frames, hop, masks, dv, duv, cfg);
      const auto& mask = side == 0 ? masks.v : masks.uv;
      const int64_t active = side == 0 ? masks.active_v() : masks.active_uv();
      Tensor mask_t({1, 1, T});
      mask_t.data = mask;
      Var loss = side == 0 ? discriminator_loss_masked(s.v_real, s.v_fake, mask_t, active)
                           : discriminator_loss_masked(s.uv_real, s.uv_fake, mask_t, active);
      tape.backward(loss);
      const Tensor& gx = tape.grad(x);
      const Tensor& gxh = tape.grad(xhat);
      double live = 0.0;
      for (int t = 0; t < T; t++) {
        if (mask[static_cast<size_t>(t)] == 0.0) {
          CHECK(gx[t] == 0.0);
          CHECK(gxh[t] == 0.0);
        } else {
          live += std::abs(gx[t]) + std::abs(gxh[t]);
        }
      }
      CHECK(live > 0.0);
    }
  }
}

#include <cmath>

#include "doctest.h"
#include "vwgan/grad_check.hpp"
#include "vwgan/losses.hpp"
#include "vwgan/reference_kernels.hpp"
#include "vwgan/rng.hpp"

using namespace vwgan;

namespace {

Tensor filled(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  for (double& x : t.data) x = v;
  return t;
}

Tensor random_mag(std::vector<int> shape, uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& x : t.data) x = rng.uniform(0.3, 1.7);  // away from 0 and the clamp floor
  return t;
}

Tensor row(std::initializer_list<double> vs) {
  Tensor t({static_cast<int>(vs.size())});
  int64_t i = 0;
  for (double v : vs) t[i++] = v;
  return t;
}

double scalar(Tape& tape, Var v) { return tape.val(v)[0]; }

}  // namespace

TEST_CASE("spectral convergence closed-form cases") {
  Tape tape;
  Var m = tape.leaf(random_mag({4, 9}, 2));
  CHECK(scalar(tape, spectral_convergence(m, m)) == 0.0);

  // mag_xhat = 2*mag gives ||m - 2m|| / ||m|| = 1 exactly: the numerator sums
  // the same squares in the same order as the denominator.
  Var doubled = ops::scale(m, 2.0);
  CHECK(scalar(tape, spectral_convergence(m, doubled)) == 1.0);

  Var zero = tape.leaf(filled({4, 9}, 0.0));
  CHECK(scalar(tape, spectral_convergence(m, zero)) == 1.0);

  // Constant magnitudes a vs b: |a-b|*sqrt(N) / (a*sqrt(N)) = |a-b|/a.
  Var a = tape.leaf(filled({2, 3}, 1.0));
  Var b = tape.leaf(filled({2, 3}, 0.5));
  CHECK(scalar(tape, spectral_convergence(a, b)) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(spectral_convergence(zero, m), NumericError);
  Var other = tape.leaf(filled({3, 9}, 1.0));
  CHECK_THROWS_AS(spectral_convergence(m, other), ShapeError);
}

TEST_CASE("log stft magnitude loss") {
  Tape tape;
  Var a = tape.leaf(filled({2, 4}, 1.0));
  Var b = tape.leaf(filled({2, 4}, 0.5));
  CHECK(scalar(tape, log_stft_magnitude_loss(a, a)) == 0.0);
  CHECK(scalar(tape, log_stft_magnitude_loss(a, b)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Values below the clamp floor are indistinguishable after clamping.
  Var tiny1 = tape.leaf(filled({1, 3}, 1e-9));
  Var tiny2 = tape.leaf(filled({1, 3}, 1e-12));
  CHECK(scalar(tape, log_stft_magnitude_loss(tiny1, tiny2)) == 0.0);
  Var one = tape.leaf(filled({1, 3}, 1.0));
  CHECK(scalar(tape, log_stft_magnitude_loss(one, tiny2)) ==
        doctest::Approx(std::log(1e7)).epsilon(1e-12));
}

TEST_CASE("multi-resolution stft loss vs hand computation") {
  StftLoss loss({{32, 8, 16, WindowKind::hann}, {16, 4, 8, WindowKind::hann}});
  CHECK(loss.max_win() == 16);

  const int n = 100;
  Rng rng(11);
  Tensor x({n}), xhat({n});
  for (int i = 0; i < n; i++) {
    x[i] = rng.gaussian() * 0.5;
    xhat[i] = x[i] + rng.gaussian() * 0.1;
  }
  Tape tape;
  Var vx = tape.leaf(x), vxh = tape.leaf(xhat);
  CHECK(scalar(tape, multi_res_stft_loss(vx, vx, loss)) == 0.0);

  double manual = 0.0;
  for (const auto& cfg : loss.resolutions()) {
    const auto plan = make_plan(cfg);
    const auto mx = ref::stft_magnitude(x.data, plan.window, cfg.fft_size, cfg.hop_size,
                                        cfg.win_size);
    const auto mxh = ref::stft_magnitude(xhat.data, plan.window, cfg.fft_size, cfg.hop_size,
                                         cfg.win_size);
    double num = 0.0, den = 0.0, lsum = 0.0;
    for (size_t i = 0; i < mx.size(); i++) {
      num += (mx[i] - mxh[i]) * (mx[i] - mxh[i]);
      den += mx[i] * mx[i];
      lsum += std::abs(std::log(std::max(mx[i], kMagClampFloor)) -
                       std::log(std::max(mxh[i], kMagClampFloor)));
    }
    manual += std::sqrt(num) / std::sqrt(den) + lsum / static_cast<double>(mx.size());
  }
  manual /= static_cast<double>(loss.resolutions().size());
  CHECK(scalar(tape, multi_res_stft_loss(vx, vxh, loss)) ==
        doctest::Approx(manual).epsilon(1e-9));

  Var rank2 = tape.leaf(filled({2, 50}, 0.1));
  CHECK_THROWS_AS(multi_res_stft_loss(rank2, rank2, loss), ShapeError);
  Var shorter = tape.leaf(filled({60}, 0.1));
  CHECK_THROWS_AS(multi_res_stft_loss(vx, shorter, loss), ShapeError);
  Var too_short = tape.leaf(filled({12}, 0.1));
  CHECK_THROWS_AS(multi_res_stft_loss(too_short, too_short, loss), ValueError);
}

TEST_CASE("stft loss configuration validation") {
  CHECK_THROWS_AS(StftLoss({}), ValueError);
  CHECK_THROWS_AS(StftLoss({{32, 8, 16, WindowKind::hann}, {32, 8, 16, WindowKind::hann}}),
                  ValueError);
  CHECK_THROWS_AS(StftLoss({{32, 8, 40, WindowKind::hann}}), ValueError);  // win > fft
  GanLossConfig gan;
  CHECK_NOTHROW(gan.validate());
  gan.lambda_adv = 0.0;
  CHECK_THROWS_AS(gan.validate(), ValueError);
  gan.lambda_adv = -1.0;
  CHECK_THROWS_AS(gan.validate(), ValueError);
}

TEST_CASE("lsgan discriminator loss closed-form cases") {
  Tape tape;
  Var ones = tape.leaf(filled({4}, 1.0));
  Var zeros = tape.leaf(filled({4}, 0.0));
  Var halves = tape.leaf(filled({4}, 0.5));
  // Perfect discriminator: real -> 1, fake -> 0.
  CHECK(scalar(tape, discriminator_loss(ones, zeros)) == 0.0);
  // Chance-level scores: (1-0.5)^2 + 0.5^2 = 0.5.
  CHECK(scalar(tape, discriminator_loss(halves, halves)) == 0.5);
  // Fully fooled: real -> 0, fake -> 1.
  CHECK(scalar(tape, discriminator_loss(zeros, ones)) == 2.0);
  // Mixed real scores {1, 0}: real term (0 + 1)/2, fake term 0.
  CHECK(scalar(tape, discriminator_loss(tape.leaf(row({1.0, 0.0})), zeros)) == 0.5);
}

TEST_CASE("lsgan adversarial loss closed-form cases") {
  Tape tape;
  CHECK(scalar(tape, adversarial_loss(tape.leaf(filled({5}, 1.0)))) == 0.0);
  CHECK(scalar(tape, adversarial_loss(tape.leaf(filled({5}, 0.0)))) == 1.0);
  CHECK(scalar(tape, adversarial_loss(tape.leaf(filled({5}, -1.0)))) == 4.0);
  CHECK(scalar(tape, adversarial_loss(tape.leaf(row({1.0, 0.0})))) == 0.5);
  Var empty = tape.leaf(Tensor{});
  CHECK_THROWS_AS(adversarial_loss(empty), ShapeError);
  CHECK_THROWS_AS(discriminator_loss(empty, empty), ShapeError);
}

TEST_CASE("masked mean") {
  Tape tape;
  Var x = tape.leaf(row({1.0, 2.0, 3.0, 4.0}));
  CHECK(scalar(tape, masked_mean(x, row({1, 0, 1, 0}), 2)) == 2.0);  // (1+3)/2
  CHECK(scalar(tape, masked_mean(x, row({1, 1, 1, 1}), 4)) == scalar(tape, ops::mean(x)));
  CHECK_THROWS_AS(masked_mean(x, row({1, 0}), 1), ShapeError);
  CHECK_THROWS_AS(masked_mean(x, row({1, 0, 1, 0}), 0), ValueError);
}

TEST_CASE("masked losses match unmasked under an all-ones mask") {
  Tape tape;
  Var real = tape.leaf(random_mag({16}, 3));
  Var fake = tape.leaf(random_mag({16}, 4));
  const Tensor mask = filled({16}, 1.0);
  CHECK(scalar(tape, discriminator_loss_masked(real, fake, mask, 16)) ==
        scalar(tape, discriminator_loss(real, fake)));
  CHECK(scalar(tape, adversarial_loss_masked(fake, mask, 16)) ==
        scalar(tape, adversarial_loss(fake)));

  // Half mask computed by hand: only positions 0 and 2 count.
  Var s = tape.leaf(row({0.2, 0.9, 0.6, -0.3}));
  const double expected = ((1 - 0.2) * (1 - 0.2) + (1 - 0.6) * (1 - 0.6)) / 2.0;
  CHECK(scalar(tape, adversarial_loss_masked(s, row({1, 0, 1, 0}), 2)) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("masked loss gradients vanish at masked positions") {
  Tape tape;
  Var s = tape.leaf(random_mag({8}, 5), true);
  const Tensor mask = row({1, 1, 0, 0, 1, 0, 1, 0});
  tape.backward(adversarial_loss_masked(s, mask, 4));
  const Tensor& g = tape.grad(s);
  for (int64_t i = 0; i < 8; i++) {
    if (mask[i] == 0.0)
      CHECK(g[i] == 0.0);
    else
      CHECK(g[i] != 0.0);
  }
}

TEST_CASE("loss gradients vs finite differences") {
  const Tensor mx = random_mag({3, 7}, 21);
  const Tensor mxh = random_mag({3, 7}, 22);
  CHECK(grad_check([&](Tape& t, Var v) { return spectral_convergence(v, t.leaf(mxh)); }, mx) <
        1e-3);
  CHECK(grad_check([&](Tape& t, Var v) { return spectral_convergence(t.leaf(mx), v); }, mxh) <
        1e-3);
  CHECK(grad_check([&](Tape& t, Var v) { return log_stft_magnitude_loss(t.leaf(mx), v); },
                   mxh) < 1e-3);

  StftLoss loss({{32, 8, 16, WindowKind::hann}});
  Tensor x({64}), xh({64});
  Rng rng(30);
  for (int i = 0; i < 64; i++) {
    x[i] = rng.gaussian() * 0.5;
    xh[i] = x[i] + rng.gaussian() * 0.2;
  }
  CHECK(grad_check([&](Tape& t, Var v) { return multi_res_stft_loss(t.leaf(x), v, loss); },
                   xh) < 1e-3);

  const Tensor scores = random_mag({12}, 40);
  CHECK(grad_check([&](Tape&, Var v) { return adversarial_loss(v); }, scores) < 1e-3);
  const Tensor other = random_mag({12}, 41);
  CHECK(grad_check([&](Tape& t, Var v) { return discriminator_loss(v, t.leaf(other)); },
                   scores) < 1e-3);
  CHECK(grad_check([&](Tape& t, Var v) { return discriminator_loss(t.leaf(other), v); },
                   scores) < 1e-3);
}

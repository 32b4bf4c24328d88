#include <cmath>

#include "doctest.h"
#include "vwgan/grad_check.hpp"
#include "vwgan/ops.hpp"
#include "vwgan/rng.hpp"
#include "vwgan/tape.hpp"
#include "vwgan/tensor.hpp"

using namespace vwgan;

namespace {

Tensor random_tensor(std::vector<int> shape, uint64_t seed, double scale = 1.0,
                     double shift = 0.0) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.gaussian() * scale + shift;
  return t;
}

// Keeps every coordinate at least `margin` away from zero so kinked ops
// (relu, leaky_relu, l1_norm) stay differentiable at the probe point.
Tensor random_signed_tensor(std::vector<int> shape, uint64_t seed, double margin = 0.25) {
  Tensor t = random_tensor(std::move(shape), seed);
  for (double& v : t.data) v = (v >= 0.0 ? 1.0 : -1.0) * (std::abs(v) + margin);
  return t;
}

}  // namespace

TEST_CASE("tensor shape and data basics") {
  Tensor t({2, 3, 4});
  CHECK(t.numel() == 24);
  CHECK(t.rank() == 3);
  CHECK(t.dim(1) == 3);
  for (double v : t.data) CHECK(v == 0.0);

  Tensor f = Tensor::full({2, 2}, 1.5);
  for (double v : f.data) CHECK(v == 1.5);

  Tensor s = Tensor::scalar(-2.25);
  CHECK(s.numel() == 1);
  CHECK(s[0] == -2.25);

  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({-1}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);

  Tensor r({2, 3, 5});
  for (int64_t i = 0; i < r.numel(); i++) r[i] = static_cast<double>(i);
  CHECK(r.row(1, 2)[0] == (1 * 3 + 2) * 5);
  CHECK(shape_str(r.shape) == "[2,3,5]");
}

TEST_CASE("rng determinism and stream restore") {
  Rng a(99), b(99), c(100);
  bool same = true, diff = false;
  for (int i = 0; i < 64; i++) {
    uint64_t x = a.next_u64(), y = b.next_u64();
    same = same && (x == y);
    diff = diff || (x != c.next_u64());
  }
  CHECK(same);
  CHECK(diff);

  Rng d(7);
  for (int i = 0; i < 10; i++) d.gaussian();
  const std::string snap = d.serialize();
  std::vector<double> expect;
  for (int i = 0; i < 10; i++) expect.push_back(d.gaussian());
  Rng e;
  e.deserialize(snap);
  for (int i = 0; i < 10; i++) CHECK(e.gaussian() == expect[static_cast<size_t>(i)]);
}

TEST_CASE("rng draw ranges and rough moments") {
  Rng rng(3);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; i++) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
    CHECK(rng.below(17) < 17);
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);
  CHECK(rng.uniform(2.0, 5.0) >= 2.0);
  CHECK(rng.uniform(2.0, 5.0) < 5.0);
}

TEST_CASE("tape wiring and gradient accumulation") {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(3.0), true);
  Var c = tape.leaf(Tensor::scalar(2.0), false);
  CHECK(tape.requires_grad(x));
  CHECK(!tape.requires_grad(c));
  CHECK_THROWS_AS(tape.grad(c), ValueError);

  // Diamond graph: x feeds two branches; leaf gradients accumulate across
  // consumers in a single backward pass. d/dx (x*c + x^2) = c + 2x = 8.
  Var y = ops::add(ops::mul(x, c), ops::square(x));
  tape.backward(y);
  CHECK(tape.grad(x)[0] == 8.0);

  Tape t2;
  Var vec = t2.leaf(Tensor({3}), true);
  CHECK_THROWS_AS(t2.backward(vec), ShapeError);
  Var frozen = t2.leaf(Tensor::scalar(1.0), false);
  CHECK_THROWS_AS(t2.backward(frozen), ValueError);
}

TEST_CASE("requires_grad propagates through ops") {
  Tape tape;
  Var a = tape.leaf(random_tensor({2, 3}, 1), false);
  Var b = tape.leaf(random_tensor({2, 3}, 2), false);
  CHECK(!tape.requires_grad(ops::add(a, b)));
  CHECK(!tape.requires_grad(ops::sum(ops::mul(a, b))));
  Var g = tape.leaf(random_tensor({2, 3}, 3), true);
  CHECK(tape.requires_grad(ops::add(a, g)));
  CHECK(tape.requires_grad(ops::mean(g)));
}

TEST_CASE("elementwise op values") {
  Tape tape;
  Tensor ta = random_tensor({2, 5}, 11);
  Tensor tb = random_tensor({2, 5}, 12);
  Var a = tape.leaf(ta), b = tape.leaf(tb);

  // tape.val() references node storage that later ops may reallocate, so
  // take copies before recording more nodes.
  const Tensor vadd = tape.val(ops::add(a, b));
  const Tensor vsub = tape.val(ops::sub(a, b));
  const Tensor vmul = tape.val(ops::mul(a, b));
  const Tensor vtanh = tape.val(ops::tanh(a));
  const Tensor vsig = tape.val(ops::sigmoid(a));
  const Tensor vlrelu = tape.val(ops::leaky_relu(a, 0.2));
  const Tensor vrelu = tape.val(ops::relu(a));
  const Tensor vsq = tape.val(ops::square(a));
  const Tensor vclamp = tape.val(ops::clamp_min(a, 0.1));
  const Tensor vscale = tape.val(ops::scale(a, -1.5));
  const Tensor vshift = tape.val(ops::add_scalar(a, 0.75));
  for (int64_t i = 0; i < ta.numel(); i++) {
    CHECK(vadd[i] == ta[i] + tb[i]);
    CHECK(vsub[i] == ta[i] - tb[i]);
    CHECK(vmul[i] == ta[i] * tb[i]);
    CHECK(vtanh[i] == std::tanh(ta[i]));
    CHECK(vsig[i] == doctest::Approx(1.0 / (1.0 + std::exp(-ta[i]))).epsilon(1e-15));
    CHECK(vlrelu[i] == (ta[i] > 0.0 ? ta[i] : 0.2 * ta[i]));
    CHECK(vrelu[i] == (ta[i] > 0.0 ? ta[i] : 0.0));
    CHECK(vsq[i] == ta[i] * ta[i]);
    CHECK(vclamp[i] == std::max(ta[i], 0.1));
    CHECK(vscale[i] == ta[i] * -1.5);
    CHECK(vshift[i] == ta[i] + 0.75);
  }
  CHECK_THROWS_AS(ops::add(a, tape.leaf(Tensor({3, 5}))), ShapeError);

  Tensor pos = random_tensor({4}, 13, 0.2, 2.0);
  const Tensor vlog = tape.val(ops::log(tape.leaf(pos)));
  for (int64_t i = 0; i < pos.numel(); i++) CHECK(vlog[i] == std::log(pos[i]));
  CHECK_THROWS_AS(ops::log(tape.leaf(Tensor::scalar(0.0))), NumericError);
  CHECK_THROWS_AS(ops::log(tape.leaf(Tensor::scalar(-1.0))), NumericError);
}

TEST_CASE("reduction and shape op values") {
  Tape tape;
  Tensor ta = random_tensor({2, 3, 4}, 21);
  Var a = tape.leaf(ta);

  double s = 0.0, l1 = 0.0, sq = 0.0;
  for (int64_t i = 0; i < ta.numel(); i++) {
    s += ta[i];
    l1 += std::abs(ta[i]);
    sq += ta[i] * ta[i];
  }
  CHECK(tape.val(ops::sum(a))[0] == doctest::Approx(s).epsilon(1e-14));
  CHECK(tape.val(ops::mean(a))[0] == doctest::Approx(s / 24.0).epsilon(1e-14));
  CHECK(tape.val(ops::l1_norm(a))[0] == doctest::Approx(l1).epsilon(1e-14));
  CHECK(tape.val(ops::frobenius_norm(a))[0] == doctest::Approx(std::sqrt(sq)).epsilon(1e-14));

  const Tensor vr = tape.val(ops::reshape(a, {6, 4}));
  CHECK(vr.shape == std::vector<int>{6, 4});
  for (int64_t i = 0; i < ta.numel(); i++) CHECK(vr[i] == ta[i]);
  CHECK_THROWS_AS(ops::reshape(a, {5, 5}), ShapeError);

  const Tensor vsl = tape.val(ops::slice_channels(a, 1, 3));
  CHECK(vsl.shape == std::vector<int>{2, 2, 4});
  for (int b = 0; b < 2; b++)
    for (int c = 0; c < 2; c++)
      for (int t = 0; t < 4; t++) CHECK(vsl.row(b, c)[t] == ta.row(b, c + 1)[t]);
  CHECK_THROWS_AS(ops::slice_channels(a, 2, 2), ShapeError);
  CHECK_THROWS_AS(ops::slice_channels(a, 0, 4), ShapeError);

  const Tensor vsc = tape.val(ops::sum_channels(a));
  CHECK(vsc.shape == std::vector<int>{2, 1, 4});
  for (int b = 0; b < 2; b++)
    for (int t = 0; t < 4; t++) {
      double acc = 0.0;
      for (int c = 0; c < 3; c++) acc += ta.row(b, c)[t];
      CHECK(vsc.row(b, 0)[t] == doctest::Approx(acc).epsilon(1e-15));
    }

  const Tensor vq =
      tape.val(ops::div(tape.leaf(Tensor::scalar(3.0)), tape.leaf(Tensor::scalar(4.0))));
  CHECK(vq[0] == 0.75);
  CHECK_THROWS_AS(ops::div(a, tape.leaf(Tensor::scalar(1.0))), ShapeError);

  Tensor mask = Tensor::full({2, 3, 4}, 2.0);
  const Tensor vm = tape.val(ops::mul_const(a, mask));
  for (int64_t i = 0; i < ta.numel(); i++) CHECK(vm[i] == ta[i] * 2.0);
}

// Criterion-level gradient tolerances: elementwise and reduce ops must come
// in under 1e-4 relative error against central differences.
TEST_CASE("elementwise and reduce op gradients vs finite differences") {
  const double tol = 1e-4;
  const Tensor pt = random_tensor({2, 3, 4}, 31);
  const Tensor safe = random_signed_tensor({2, 3, 4}, 32);
  const Tensor other = random_tensor({2, 3, 4}, 33);

  auto with_other = [&](Var (*op)(Var, Var), bool probe_first) {
    return [op, probe_first, &other](Tape& t, Var v) {
      Var o = t.leaf(other, false);
      return ops::sum(ops::tanh(probe_first ? op(v, o) : op(o, v)));
    };
  };
  CHECK(grad_check(with_other(&ops::add, true), pt) < tol);
  CHECK(grad_check(with_other(&ops::add, false), pt) < tol);
  CHECK(grad_check(with_other(&ops::sub, true), pt) < tol);
  CHECK(grad_check(with_other(&ops::sub, false), pt) < tol);
  CHECK(grad_check(with_other(&ops::mul, true), pt) < tol);
  CHECK(grad_check(with_other(&ops::mul, false), pt) < tol);

  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::tanh(v)); }, pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::sigmoid(v)); }, pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::square(v)); }, pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::scale(v, -2.5)); }, pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::square(ops::add_scalar(v, 1.5))); },
                   pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::leaky_relu(v, 0.2)); }, safe) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::relu(v)); }, safe) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::l1_norm(v); }, safe) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::frobenius_norm(v); }, safe) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::mean(v); }, pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(v); }, pt) < tol);

  const Tensor pos = random_tensor({2, 3, 4}, 34, 0.2, 3.0);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::log(v)); }, pos) < tol);
  // Probe clamp_min away from the kink at the floor.
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::square(ops::clamp_min(v, 0.05))); },
                   safe) < tol);

  Tensor mask({2, 3, 4});
  for (int64_t i = 0; i < mask.numel(); i++) mask[i] = (i % 3 == 0) ? 1.0 : 0.0;
  CHECK(grad_check(
            [&](Tape&, Var v) { return ops::sum(ops::square(ops::mul_const(v, mask))); }, pt) <
        tol);

  CHECK(grad_check(
            [](Tape& t, Var v) { return ops::div(v, t.leaf(Tensor::scalar(3.0), false)); },
            Tensor::scalar(2.0)) < tol);
  CHECK(grad_check(
            [](Tape& t, Var v) { return ops::div(t.leaf(Tensor::scalar(3.0), false), v); },
            Tensor::scalar(2.0)) < tol);

  CHECK(grad_check(
            [](Tape&, Var v) { return ops::sum(ops::square(ops::reshape(v, {4, 6}))); }, pt) <
        tol);
  CHECK(grad_check(
            [](Tape&, Var v) { return ops::sum(ops::square(ops::slice_channels(v, 1, 3))); },
            pt) < tol);
  CHECK(grad_check([](Tape&, Var v) { return ops::sum(ops::square(ops::sum_channels(v))); },
                   pt) < tol);
}

TEST_CASE("gradients flow through composite expressions") {
  // d/dx of sum((tanh(x) * sigmoid(x) + x^2)) against finite differences.
  const Tensor pt = random_tensor({3, 7}, 41, 0.5);
  const double err = grad_check(
      [](Tape&, Var v) {
        Var g = ops::mul(ops::tanh(v), ops::sigmoid(v));
        return ops::sum(ops::add(g, ops::square(v)));
      },
      pt);
  CHECK(err < 1e-4);
}

TEST_CASE("grad_check rejects bad eps and non-scalar graphs") {
  CHECK_THROWS_AS(grad_check([](Tape&, Var v) { return v; }, Tensor({3}), 1e-2), ValueError);
  CHECK_THROWS_AS(grad_check([](Tape&, Var v) { return v; }, Tensor({3})), ShapeError);
}

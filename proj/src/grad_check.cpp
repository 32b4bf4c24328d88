#include "vwgan/grad_check.hpp"

#include <cmath>

namespace vwgan {

namespace {

double eval_scalar(const ScalarGraphFn& f, const Tensor& point) {
  Tape tape;
  Var x = tape.leaf(point, false);
  Var y = f(tape, x);
  if (tape.val(y).numel() != 1)
    throw ShapeError("grad_check: function output is not scalar, shape " +
                     shape_str(tape.val(y).shape));
  return tape.val(y)[0];
}

}  // namespace

double grad_check(const ScalarGraphFn& f, const Tensor& point, double eps) {
  if (eps < 1e-6 || eps > 1e-4)
    throw ValueError("grad_check eps must be in [1e-6, 1e-4], got " + std::to_string(eps));

  Tensor analytic;
  {
    Tape tape;
    Var x = tape.leaf(point, true);
    Var y = f(tape, x);
    if (tape.val(y).numel() != 1)
      throw ShapeError("grad_check: function output is not scalar, shape " +
                       shape_str(tape.val(y).shape));
    tape.backward(y);
    analytic = tape.grad(x);
  }

  double worst = 0.0;
  Tensor probe = point;
  for (int64_t i = 0; i < point.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = eval_scalar(f, probe);
    probe[i] = orig - eps;
    const double down = eval_scalar(f, probe);
    probe[i] = orig;
    const double central = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic[i] - central) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace vwgan

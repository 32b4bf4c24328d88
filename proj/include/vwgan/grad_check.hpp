#pragma once

#include <functional>

#include "vwgan/ops.hpp"

namespace vwgan {

// Builds a scalar graph from a single leaf tensor.
using ScalarGraphFn = std::function<Var(Tape&, Var)>;

// Compares the analytic gradient of f at `point` against central finite
// differences. Returns max over coordinates of
//   |analytic - central| / max(1, |analytic|).
// eps must lie in [1e-6, 1e-4]. Throws ShapeError if f is not scalar-valued.
double grad_check(const ScalarGraphFn& f, const Tensor& point, double eps = 1e-5);

}  // namespace vwgan

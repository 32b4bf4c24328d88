#include "vwgan/ops.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace vwgan::ops {

namespace {

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ValueError("operands live on different tapes");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
}

// y[i] = f(x[i]); backward dx[i] += dy[i] * dfdx(x[i], y[i]).
template <class F, class DF>
Var unary_elementwise(Var a, F f, DF dfdx) {
  Tape& t = *a.tape;
  const Tensor& x = t.val(a);
  Tensor y(x.shape);
  for (int64_t i = 0; i < x.numel(); ++i) y[i] = f(x[i]);
  Var out = t.make_node(std::move(y), t.requires_grad(a));
  if (t.requires_grad(a)) {
    t.record([&t, a, out, dfdx]() {
      const Tensor& x = t.val(a);
      const Tensor& yv = t.val(out);
      const Tensor& go = t.grad(out);
      Tensor& ga = t.grad_mut(a);
      for (int64_t i = 0; i < x.numel(); ++i) ga[i] += go[i] * dfdx(x[i], yv[i]);
    });
  }
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  check_same_shape(xa, xb, "add");
  Tensor y(xa.shape);
  for (int64_t i = 0; i < xa.numel(); ++i) y[i] = xa[i] + xb[i];
  bool rg = t.requires_grad(a) || t.requires_grad(b);
  Var out = t.make_node(std::move(y), rg);
  if (rg) {
    t.record([&t, a, b, out]() {
      const Tensor& go = t.grad(out);
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
      }
      if (t.requires_grad(b)) {
        Tensor& gb = t.grad_mut(b);
        for (int64_t i = 0; i < go.numel(); ++i) gb[i] += go[i];
      }
    });
  }
  return out;
}

Var sub(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  check_same_shape(xa, xb, "sub");
  Tensor y(xa.shape);
  for (int64_t i = 0; i < xa.numel(); ++i) y[i] = xa[i] - xb[i];
  bool rg = t.requires_grad(a) || t.requires_grad(b);
  Var out = t.make_node(std::move(y), rg);
  if (rg) {
    t.record([&t, a, b, out]() {
      const Tensor& go = t.grad(out);
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
      }
      if (t.requires_grad(b)) {
        Tensor& gb = t.grad_mut(b);
        for (int64_t i = 0; i < go.numel(); ++i) gb[i] -= go[i];
      }
    });
  }
  return out;
}

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  check_same_shape(xa, xb, "mul");
  Tensor y(xa.shape);
  for (int64_t i = 0; i < xa.numel(); ++i) y[i] = xa[i] * xb[i];
  bool rg = t.requires_grad(a) || t.requires_grad(b);
  Var out = t.make_node(std::move(y), rg);
  if (rg) {
    t.record([&t, a, b, out]() {
      const Tensor& go = t.grad(out);
      const Tensor& va = t.val(a);
      const Tensor& vb = t.val(b);
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_mut(a);
        for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * vb[i];
      }
      if (t.requires_grad(b)) {
        Tensor& gb = t.grad_mut(b);
        for (int64_t i = 0; i < go.numel(); ++i) gb[i] += go[i] * va[i];
      }
    });
  }
  return out;
}

Var scale(Var a, double c) {
  return unary_elementwise(
      a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary_elementwise(
      a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var tanh(Var a) {
  return unary_elementwise(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary_elementwise(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var leaky_relu(Var a, double alpha) {
  return unary_elementwise(
      a, [alpha](double x) { return x >= 0.0 ? x : alpha * x; },
      [alpha](double x, double) { return x >= 0.0 ? 1.0 : alpha; });
}

Var relu(Var a) { return leaky_relu(a, 0.0); }

Var log(Var a) {
  const Tensor& x = a.tape->val(a);
  for (int64_t i = 0; i < x.numel(); ++i)
    if (x[i] <= 0.0)
      throw NumericError("log of non-positive value " + std::to_string(x[i]) + " at index " +
                         std::to_string(i));
  return unary_elementwise(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary_elementwise(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var clamp_min(Var a, double floor) {
  return unary_elementwise(
      a, [floor](double x) { return x < floor ? floor : x; },
      [floor](double x, double) { return x > floor ? 1.0 : 0.0; });
}

Var mul_const(Var a, const Tensor& c) {
  Tape& t = *a.tape;
  const Tensor& x = t.val(a);
  check_same_shape(x, c, "mul_const");
  Tensor y(x.shape);
  for (int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] * c[i];
  Var out = t.make_node(std::move(y), t.requires_grad(a));
  if (t.requires_grad(a)) {
    auto cc = std::make_shared<Tensor>(c);
    t.record([&t, a, out, cc]() {
      const Tensor& go = t.grad(out);
      Tensor& ga = t.grad_mut(a);
      for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * (*cc)[i];
    });
  }
  return out;
}

Var div(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  if (xa.numel() != 1 || xb.numel() != 1) throw ShapeError("div is defined for scalars only");
  bool rg = t.requires_grad(a) || t.requires_grad(b);
  Var out = t.make_node(Tensor::scalar(xa[0] / xb[0]), rg);
  if (rg) {
    t.record([&t, a, b, out]() {
      const double go = t.grad(out)[0];
      const double va = t.val(a)[0];
      const double vb = t.val(b)[0];
      if (t.requires_grad(a)) t.grad_mut(a)[0] += go / vb;
      if (t.requires_grad(b)) t.grad_mut(b)[0] -= go * va / (vb * vb);
    });
  }
  return out;
}

namespace {

template <class Fwd, class Bwd>
Var reduction(Var a, const char* name, Fwd fwd, Bwd bwd) {
  Tape& t = *a.tape;
  const Tensor& x = t.val(a);
  if (x.numel() == 0) throw ShapeError(std::string(name) + " of empty tensor");
  Var out = t.make_node(Tensor::scalar(fwd(x)), t.requires_grad(a));
  if (t.requires_grad(a)) {
    t.record([&t, a, out, bwd]() {
      const Tensor& x = t.val(a);
      const double y = t.val(out)[0];
      const double go = t.grad(out)[0];
      Tensor& ga = t.grad_mut(a);
      bwd(x, y, go, ga);
    });
  }
  return out;
}

}  // namespace

Var sum(Var a) {
  return reduction(
      a, "sum",
      [](const Tensor& x) {
        double s = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) s += x[i];
        return s;
      },
      [](const Tensor& x, double, double go, Tensor& ga) {
        for (int64_t i = 0; i < x.numel(); ++i) ga[i] += go;
      });
}

Var mean(Var a) {
  return reduction(
      a, "mean",
      [](const Tensor& x) {
        double s = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) s += x[i];
        return s / static_cast<double>(x.numel());
      },
      [](const Tensor& x, double, double go, Tensor& ga) {
        const double inv = go / static_cast<double>(x.numel());
        for (int64_t i = 0; i < x.numel(); ++i) ga[i] += inv;
      });
}

Var l1_norm(Var a) {
  return reduction(
      a, "l1_norm",
      [](const Tensor& x) {
        double s = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) s += std::abs(x[i]);
        return s;
      },
      [](const Tensor& x, double, double go, Tensor& ga) {
        for (int64_t i = 0; i < x.numel(); ++i) {
          if (x[i] > 0.0)
            ga[i] += go;
          else if (x[i] < 0.0)
            ga[i] -= go;
          // subgradient 0 at x == 0
        }
      });
}

Var frobenius_norm(Var a) {
  return reduction(
      a, "frobenius_norm",
      [](const Tensor& x) {
        double s = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) s += x[i] * x[i];
        return std::sqrt(s);
      },
      [](const Tensor& x, double y, double go, Tensor& ga) {
        if (y <= 0.0) return;  // subgradient 0 at the origin
        const double inv = go / y;
        for (int64_t i = 0; i < x.numel(); ++i) ga[i] += inv * x[i];
      });
}

Var reshape(Var a, std::vector<int> shape) {
  Tape& t = *a.tape;
  const Tensor& x = t.val(a);
  Tensor y(std::move(shape), x.data);
  if (y.numel() != x.numel())
    throw ShapeError("reshape numel mismatch " + shape_str(x.shape) + " -> " + shape_str(y.shape));
  Var out = t.make_node(std::move(y), t.requires_grad(a));
  if (t.requires_grad(a)) {
    t.record([&t, a, out]() {
      const Tensor& go = t.grad(out);
      Tensor& ga = t.grad_mut(a);
      for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
    });
  }
  return out;
}

Var slice_channels(Var a, int c0, int c1) {
  Tape& t = *a.tape;
  const Tensor& x = t.val(a);
  if (x.rank() != 3) throw ShapeError("slice_channels expects [B,C,T], got " + shape_str(x.shape));
  const int B = x.dim(0), C = x.dim(1), T = x.dim(2);
  if (c0 < 0 || c1 > C || c0 >= c1)
    throw ShapeError("slice_channels range [" + std::to_string(c0) + "," + std::to_string(c1) +
                     ") out of " + std::to_string(C) + " channels");
  Tensor y({B, c1 - c0, T});
  for (int b = 0; b < B; ++b)
    for (int c = c0; c < c1; ++c)
      for (int i = 0; i < T; ++i) y.row(b, c - c0)[i] = x.row(b, c)[i];
  Var out = t.make_node(std::move(y), t.requires_grad(a));
  if (t.requires_grad(a)) {
    t.record([&t, a, out, B, c0, c1, T]() {
      const Tensor& go = t.grad(out);
      Tensor& ga = t.grad_mut(a);
      for (int b = 0; b < B; ++b)
        for (int c = c0; c < c1; ++c)
          for (int i = 0; i < T; ++i) ga.row(b, c)[i] += go.row(b, c - c0)[i];
    });
  }
  return out;
}

Var sum_channels(Var a) {
  Tape& t = *a.tape;
  const Tensor& x = t.val(a);
  if (x.rank() != 3) throw ShapeError("sum_channels expects [B,C,T], got " + shape_str(x.shape));
  const int B = x.dim(0), C = x.dim(1), T = x.dim(2);
  Tensor y({B, 1, T});
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const double* src = x.row(b, c);
      double* dst = y.row(b, 0);
      for (int i = 0; i < T; ++i) dst[i] += src[i];
    }
  Var out = t.make_node(std::move(y), t.requires_grad(a));
  if (t.requires_grad(a)) {
    t.record([&t, a, out, B, C, T]() {
      const Tensor& go = t.grad(out);
      Tensor& ga = t.grad_mut(a);
      for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
          const double* src = go.row(b, 0);
          double* dst = ga.row(b, c);
          for (int i = 0; i < T; ++i) dst[i] += src[i];
        }
    });
  }
  return out;
}

Var conv1d(Var input, Var weight, Var bias, int dilation) {
  check_same_tape(input, weight);
  check_same_tape(input, bias);
  Tape& t = *input.tape;
  const Tensor& x = t.val(input);
  const Tensor& w = t.val(weight);
  const Tensor& bv = t.val(bias);
  if (x.rank() != 3) throw ShapeError("conv1d input must be [B,Ci,T], got " + shape_str(x.shape));
  if (w.rank() != 3)
    throw ShapeError("conv1d weight must be [Co,Ci,K], got " + shape_str(w.shape));
  const int B = x.dim(0), Ci = x.dim(1), T = x.dim(2);
  const int Co = w.dim(0), K = w.dim(2);
  if (w.dim(1) != Ci)
    throw ShapeError("conv1d: weight in-channel dim " + std::to_string(w.dim(1)) +
                     " != input channel dim " + std::to_string(Ci));
  if (K % 2 == 0) throw ShapeError("conv1d kernel must be odd, got " + std::to_string(K));
  if (dilation < 1) throw ValueError("conv1d dilation must be >= 1");
  if (bv.rank() != 1 || bv.dim(0) != Co)
    throw ShapeError("conv1d: bias dim " + shape_str(bv.shape) + " != out channels " +
                     std::to_string(Co));

  Tensor y({B, Co, T});
  kernels::conv1d_forward(y.ptr(), x.ptr(), w.ptr(), bv.ptr(), B, Ci, Co, T, K, dilation);
  bool rg = t.requires_grad(input) || t.requires_grad(weight) || t.requires_grad(bias);
  Var out = t.make_node(std::move(y), rg);
  if (rg) {
    t.record([&t, input, weight, bias, out, B, Ci, Co, T, K, dilation]() {
      const Tensor& go = t.grad(out);
      if (t.requires_grad(input))
        kernels::conv1d_backward_input(t.grad_mut(input).ptr(), go.ptr(), t.val(weight).ptr(), B,
                                       Ci, Co, T, K, dilation);
      if (t.requires_grad(weight) || t.requires_grad(bias)) {
        double* dw = t.requires_grad(weight) ? t.grad_mut(weight).ptr() : nullptr;
        double* db = t.requires_grad(bias) ? t.grad_mut(bias).ptr() : nullptr;
        if (dw == nullptr) {
          // bias-only grad; reuse a scratch weight buffer
          Tensor scratch({Co, Ci, K});
          kernels::conv1d_backward_weight(scratch.ptr(), db, t.val(input).ptr(), go.ptr(), B, Ci,
                                          Co, T, K, dilation);
        } else {
          kernels::conv1d_backward_weight(dw, db, t.val(input).ptr(), go.ptr(), B, Ci, Co, T, K,
                                          dilation);
        }
      }
    });
  }
  return out;
}

Var frame_conv(Var weight, Var bias, const Tensor& frames, int hop) {
  check_same_tape(weight, bias);
  Tape& t = *weight.tape;
  const Tensor& w = t.val(weight);
  const Tensor& bv = t.val(bias);
  if (frames.rank() != 3)
    throw ShapeError("frame_conv frames must be [B,Ci,F], got " + shape_str(frames.shape));
  if (w.rank() != 3)
    throw ShapeError("frame_conv weight must be [Co,Ci,K], got " + shape_str(w.shape));
  const int B = frames.dim(0), Ci = frames.dim(1), F = frames.dim(2);
  const int Co = w.dim(0), K = w.dim(2);
  if (w.dim(1) != Ci)
    throw ShapeError("frame_conv: weight in-channel dim " + std::to_string(w.dim(1)) +
                     " != frame channel dim " + std::to_string(Ci));
  if (K % 2 == 0) throw ShapeError("frame_conv kernel must be odd, got " + std::to_string(K));
  if (hop < 1) throw ValueError("frame_conv hop must be >= 1");
  if (bv.rank() != 1 || bv.dim(0) != Co)
    throw ShapeError("frame_conv: bias dim " + shape_str(bv.shape) + " != out channels " +
                     std::to_string(Co));
  const int T = F * hop;

  Tensor y({B, Co, T});
  kernels::frame_conv_forward(y.ptr(), frames.ptr(), w.ptr(), bv.ptr(), B, Ci, Co, F, hop, T, K);
  bool rg = t.requires_grad(weight) || t.requires_grad(bias);
  Var out = t.make_node(std::move(y), rg);
  if (rg) {
    auto fr = std::make_shared<Tensor>(frames);
    t.record([&t, weight, bias, out, fr, B, Ci, Co, F, hop, T, K]() {
      const Tensor& go = t.grad(out);
      double* dw = t.requires_grad(weight) ? t.grad_mut(weight).ptr() : nullptr;
      double* db = t.requires_grad(bias) ? t.grad_mut(bias).ptr() : nullptr;
      if (dw == nullptr) {
        Tensor scratch({Co, Ci, K});
        kernels::frame_conv_backward_weight(scratch.ptr(), db, fr->ptr(), go.ptr(), B, Ci, Co, F,
                                            hop, T, K);
      } else {
        kernels::frame_conv_backward_weight(dw, db, fr->ptr(), go.ptr(), B, Ci, Co, F, hop, T, K);
      }
    });
  }
  return out;
}

Var stft_magnitude(Var x, const kernels::DftPlan& plan) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  if (xv.rank() != 1)
    throw ShapeError("stft_magnitude expects a 1-D signal, got " + shape_str(xv.shape));
  const int n = xv.dim(0);
  if (n < plan.win)
    throw ValueError("signal length " + std::to_string(n) + " shorter than analysis window " +
                     std::to_string(plan.win));
  const int F = kernels::num_frames(n, plan);
  Tensor mag({F, plan.bins});
  auto re = std::make_shared<std::vector<double>>(static_cast<size_t>(F) * plan.bins);
  auto im = std::make_shared<std::vector<double>>(static_cast<size_t>(F) * plan.bins);
  kernels::stft_forward(mag.ptr(), re->data(), im->data(), xv.ptr(), n, plan);
  Var out = t.make_node(std::move(mag), t.requires_grad(x));
  if (t.requires_grad(x)) {
    const kernels::DftPlan* pp = &plan;  // plans outlive tapes (owned by loss configs)
    t.record([&t, x, out, re, im, pp, n]() {
      const Tensor& go = t.grad(out);
      kernels::stft_backward(t.grad_mut(x).ptr(), go.ptr(), re->data(), im->data(),
                             t.val(out).ptr(), n, *pp);
    });
  }
  return out;
}

}  // namespace vwgan::ops

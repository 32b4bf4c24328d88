#pragma once

#include "vwgan/kernels.hpp"
#include "vwgan/tape.hpp"

namespace vwgan::ops {

// Elementwise. Operands must have identical shapes; the only broadcasting is
// the explicit scalar variants below.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var tanh(Var a);
Var sigmoid(Var a);
Var leaky_relu(Var a, double alpha = 0.2);
Var relu(Var a);
Var log(Var a);  // throws NumericError on non-positive input
Var square(Var a);
Var clamp_min(Var a, double floor);

// Elementwise product with a constant tensor (masks, precomputed embeddings).
Var mul_const(Var a, const Tensor& c);

// Scalar quotient with full quotient-rule gradients; both operands scalar.
Var div(Var a, Var b);

// Reductions to a scalar. Norm gradients take subgradient zero at the origin.
Var sum(Var a);
Var mean(Var a);
Var l1_norm(Var a);
Var frobenius_norm(Var a);

// Shape plumbing.
Var reshape(Var a, std::vector<int> shape);
Var slice_channels(Var a, int c0, int c1);  // [B, C, T] -> [B, c1-c0, T]
Var sum_channels(Var a);                    // [B, C, T] -> [B, 1, T]

// Dilated 1-D convolution with symmetric "same" zero padding (odd kernel).
// input [B, Ci, T], weight [Co, Ci, K], bias [Co]. Output [B, Co, T].
Var conv1d(Var input, Var weight, Var bias, int dilation);

// conv1d over a frame-rate signal upsampled by repetition, without
// materializing the upsampled input. frames is a constant [B, Ci, F]; the
// equivalent plain input has length T = F*hop. Gradients flow to weight/bias.
Var frame_conv(Var weight, Var bias, const Tensor& frames, int hop);

// |STFT| of a 1-D signal. Output [frames, fft/2+1].
Var stft_magnitude(Var x, const kernels::DftPlan& plan);

}  // namespace vwgan::ops

#pragma once

#include <vector>

namespace vwgan::kernels {

// Production kernels for the hot inner loops. Every OpenMP loop writes a
// disjoint set of output elements and performs its accumulations in a fixed
// serial order, so results are bit-identical for any thread count.

// ---- dilated 1-D convolution, symmetric "same" zero padding, K odd ----
// in [B, Ci, T], w [Co, Ci, K], bias [Co] or null, out [B, Co, T].
void conv1d_forward(double* out, const double* in, const double* w, const double* bias, int B,
                    int Ci, int Co, int T, int K, int dilation);

// Accumulates into din [B, Ci, T].
void conv1d_backward_input(double* din, const double* dout, const double* w, int B, int Ci, int Co,
                           int T, int K, int dilation);

// Accumulates into dw [Co, Ci, K] and dbias [Co] (dbias may be null).
void conv1d_backward_weight(double* dw, double* dbias, const double* in, const double* dout, int B,
                            int Ci, int Co, int T, int K, int dilation);

// ---- convolution over a frame-rate signal upsampled by repetition ----
// Computes conv1d(repeat(frames, hop), w, bias) without materializing the
// upsampled input: because the input is constant over each hop-length block,
// the kernel taps collapse to at most K/hop + 1 frame lags per output phase.
// frames [B, Ci, F], out [B, Co, T] with T <= F*hop; dilation is 1.
void frame_conv_forward(double* out, const double* frames, const double* w, const double* bias,
                        int B, int Ci, int Co, int F, int hop, int T, int K);

// Accumulates into dw [Co, Ci, K] and dbias [Co] (dbias may be null).
void frame_conv_backward_weight(double* dw, double* dbias, const double* frames,
                                const double* dout, int B, int Ci, int Co, int F, int hop, int T,
                                int K);

// ---- STFT magnitude via tabulated real DFT ----
struct DftPlan {
  int fft = 0;
  int hop = 0;
  int win = 0;
  int bins = 0;                      // fft/2 + 1
  std::vector<double> window;        // length win
  std::vector<double> cos_t, sin_t;  // [bins * win]
};

DftPlan make_dft_plan(int fft, int hop, int win, bool hann_window);

inline int num_frames(int n, const DftPlan& p) { return 1 + (n - p.win) / p.hop; }

// mag/re/im are [frames, bins]; frames from num_frames(n, plan).
void stft_forward(double* mag, double* re, double* im, const double* x, int n, const DftPlan& p);

// Accumulates into dx [n]. Magnitude zeros get subgradient zero.
void stft_backward(double* dx, const double* dmag, const double* re, const double* im,
                   const double* mag, int n, const DftPlan& p);

}  // namespace vwgan::kernels

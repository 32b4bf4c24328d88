#include "vwgan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vwgan::kernels {

namespace {

inline int floor_div(int a, int b) {
  int q = a / b;
  return (a % b != 0 && a < 0) ? q - 1 : q;
}

inline const double* crow(const double* base, int b, int c, int C, int T) {
  return base + (static_cast<int64_t>(b) * C + c) * T;
}

inline double* mrow(double* base, int b, int c, int C, int T) {
  return base + (static_cast<int64_t>(b) * C + c) * T;
}

}  // namespace

void conv1d_forward(double* out, const double* in, const double* w, const double* bias, int B,
                    int Ci, int Co, int T, int K, int dilation) {
  const int center = K / 2;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int oc = 0; oc < Co; ++oc) {
      double* orow = mrow(out, b, oc, Co, T);
      const double bv = bias ? bias[oc] : 0.0;
      for (int t = 0; t < T; ++t) orow[t] = bv;
      // Interior samples see every tap; the edge helper guards the rest.
      const int lo = std::min(T, center * dilation);
      const int hi = std::max(lo, T - center * dilation);
      for (int ic = 0; ic < Ci; ++ic) {
        const double* irow = crow(in, b, ic, Ci, T);
        const double* wrow = w + (static_cast<int64_t>(oc) * Ci + ic) * K;
        auto edge = [&](int t) {
          double acc = 0.0;
          for (int k = 0; k < K; ++k) {
            const int s = t + (k - center) * dilation;
            if (s >= 0 && s < T) acc += wrow[k] * irow[s];
          }
          orow[t] += acc;
        };
        if (K == 1) {
          const double w0 = wrow[0];
          for (int t = 0; t < T; ++t) orow[t] += w0 * irow[t];
          continue;
        }
        if (K == 3) {
          const double w0 = wrow[0], w1 = wrow[1], w2 = wrow[2];
          const int d = dilation;
          for (int t = lo; t < hi; ++t)
            orow[t] += w0 * irow[t - d] + w1 * irow[t] + w2 * irow[t + d];
        } else if (K == 5) {
          const double w0 = wrow[0], w1 = wrow[1], w2 = wrow[2], w3 = wrow[3], w4 = wrow[4];
          const int d = dilation;
          for (int t = lo; t < hi; ++t)
            orow[t] += w0 * irow[t - 2 * d] + w1 * irow[t - d] + w2 * irow[t] +
                       w3 * irow[t + d] + w4 * irow[t + 2 * d];
        } else {
          for (int t = lo; t < hi; ++t) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += wrow[k] * irow[t + (k - center) * dilation];
            orow[t] += acc;
          }
        }
        for (int t = 0; t < lo; ++t) edge(t);
        for (int t = hi; t < T; ++t) edge(t);
      }
    }
  }
}

void conv1d_backward_input(double* din, const double* dout, const double* w, int B, int Ci, int Co,
                           int T, int K, int dilation) {
  const int center = K / 2;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int ic = 0; ic < Ci; ++ic) {
      double* drow = mrow(din, b, ic, Ci, T);
      const int lo = std::min(T, center * dilation);
      const int hi = std::max(lo, T - center * dilation);
      for (int oc = 0; oc < Co; ++oc) {
        const double* grow = crow(dout, b, oc, Co, T);
        const double* wrow = w + (static_cast<int64_t>(oc) * Ci + ic) * K;
        // out[t] took in[t + off]; so din[s] gathers dout[s - off].
        auto edge = [&](int s) {
          double acc = 0.0;
          for (int k = 0; k < K; ++k) {
            const int t = s - (k - center) * dilation;
            if (t >= 0 && t < T) acc += wrow[k] * grow[t];
          }
          drow[s] += acc;
        };
        if (K == 1) {
          const double w0 = wrow[0];
          for (int s = 0; s < T; ++s) drow[s] += w0 * grow[s];
          continue;
        }
        if (K == 3) {
          const double w0 = wrow[0], w1 = wrow[1], w2 = wrow[2];
          const int d = dilation;
          for (int s = lo; s < hi; ++s)
            drow[s] += w0 * grow[s + d] + w1 * grow[s] + w2 * grow[s - d];
        } else if (K == 5) {
          const double w0 = wrow[0], w1 = wrow[1], w2 = wrow[2], w3 = wrow[3], w4 = wrow[4];
          const int d = dilation;
          for (int s = lo; s < hi; ++s)
            drow[s] += w0 * grow[s + 2 * d] + w1 * grow[s + d] + w2 * grow[s] +
                       w3 * grow[s - d] + w4 * grow[s - 2 * d];
        } else {
          for (int s = lo; s < hi; ++s) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += wrow[k] * grow[s - (k - center) * dilation];
            drow[s] += acc;
          }
        }
        for (int s = 0; s < lo; ++s) edge(s);
        for (int s = hi; s < T; ++s) edge(s);
      }
    }
  }
}

namespace {

// Dot product with eight independent partial sums so the compiler can keep
// the reduction in vector registers; the lane layout is fixed, which keeps
// results identical from run to run.
inline double dot8(const double* a, const double* b, int n) {
  double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int t = 0;
  for (; t + 8 <= n; t += 8)
    for (int j = 0; j < 8; ++j) lane[j] += a[t + j] * b[t + j];
  double acc = ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
               ((lane[4] + lane[5]) + (lane[6] + lane[7]));
  for (; t < n; ++t) acc += a[t] * b[t];
  return acc;
}

inline double sum8(const double* a, int n) {
  double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int t = 0;
  for (; t + 8 <= n; t += 8)
    for (int j = 0; j < 8; ++j) lane[j] += a[t + j];
  double acc = ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
               ((lane[4] + lane[5]) + (lane[6] + lane[7]));
  for (; t < n; ++t) acc += a[t];
  return acc;
}

}  // namespace

void conv1d_backward_weight(double* dw, double* dbias, const double* in, const double* dout, int B,
                            int Ci, int Co, int T, int K, int dilation) {
  const int center = K / 2;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < Co; ++oc) {
    for (int ic = 0; ic < Ci; ++ic) {
      double* wrow = dw + (static_cast<int64_t>(oc) * Ci + ic) * K;
      for (int k = 0; k < K; ++k) {
        const int off = (k - center) * dilation;
        const int t0 = std::max(0, -off);
        const int t1 = std::min(T, T - off);
        double acc = 0.0;
        for (int b = 0; b < B; ++b) {
          const double* grow = crow(dout, b, oc, Co, T);
          const double* irow = crow(in, b, ic, Ci, T) + off;
          if (t1 > t0) acc += dot8(grow + t0, irow + t0, t1 - t0);
        }
        wrow[k] += acc;
      }
    }
    if (dbias) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b) acc += sum8(crow(dout, b, oc, Co, T), T);
      dbias[oc] += acc;
    }
  }
}

namespace {

// Collapsed taps: for output phase r = t % hop, frame lag j relative to
// t / hop, wc[((oc*Ci+ic)*nj + (j - jmin))*hop + r] sums the kernel taps that
// land on that lag. Lag-major layout so each lag is a contiguous hop-length
// column, letting the forward pass run as saxpys over output segments.
struct Collapsed {
  int jmin = 0;
  int nj = 0;
  std::vector<double> wc;
};

Collapsed collapse_taps(const double* w, int Ci, int Co, int hop, int K) {
  Collapsed c;
  const int center = K / 2;
  c.jmin = floor_div(-center, hop);
  const int jmax = floor_div(hop - 1 + K - 1 - center, hop);
  c.nj = jmax - c.jmin + 1;
  c.wc.assign(static_cast<size_t>(Co) * Ci * hop * c.nj, 0.0);
  for (int oc = 0; oc < Co; ++oc)
    for (int ic = 0; ic < Ci; ++ic) {
      const double* wrow = w + (static_cast<int64_t>(oc) * Ci + ic) * K;
      double* base = c.wc.data() + (static_cast<int64_t>(oc) * Ci + ic) * hop * c.nj;
      for (int r = 0; r < hop; ++r)
        for (int k = 0; k < K; ++k) {
          int j = floor_div(r + k - center, hop);
          base[static_cast<int64_t>(j - c.jmin) * hop + r] += wrow[k];
        }
    }
  return c;
}

}  // namespace

void frame_conv_forward(double* out, const double* frames, const double* w, const double* bias,
                        int B, int Ci, int Co, int F, int hop, int T, int K) {
  if (K == 1) {
    // A kernel-1 tap sees exactly one frame: compute at frame rate, then
    // replicate each frame value across its hop span.
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b) {
      for (int oc = 0; oc < Co; ++oc) {
        const int nf = (T + hop - 1) / hop;
        std::vector<double> acc(nf, bias ? bias[oc] : 0.0);
        const double* wrow = w + static_cast<int64_t>(oc) * Ci;
        for (int ic = 0; ic < Ci; ++ic) {
          const double wv = wrow[ic];
          if (wv == 0.0) continue;
          const double* hrow = crow(frames, b, ic, Ci, F);
          for (int q = 0; q < nf; ++q) acc[q] += wv * hrow[q];
        }
        double* orow = mrow(out, b, oc, Co, T);
        for (int q = 0; q < nf; ++q) {
          const int t1 = std::min(T, (q + 1) * hop);
          for (int t = q * hop; t < t1; ++t) orow[t] = acc[q];
        }
      }
    }
    return;
  }
  const Collapsed c = collapse_taps(w, Ci, Co, hop, K);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int oc = 0; oc < Co; ++oc) {
      double* orow = mrow(out, b, oc, Co, T);
      const double bv = bias ? bias[oc] : 0.0;
      for (int t = 0; t < T; ++t) orow[t] = bv;
      const int nf = (T + hop - 1) / hop;
      for (int ic = 0; ic < Ci; ++ic) {
        const double* hrow = crow(frames, b, ic, Ci, F);
        const double* base = c.wc.data() + (static_cast<int64_t>(oc) * Ci + ic) * hop * c.nj;
        // Frame q drives output samples [q*hop, q*hop+len): one saxpy per lag.
        for (int q = 0; q < nf; ++q) {
          double* oseg = orow + static_cast<int64_t>(q) * hop;
          const int len = std::min(hop, T - q * hop);
          for (int jr = 0; jr < c.nj; ++jr) {
            const int j = q + c.jmin + jr;
            if (j < 0 || j >= F) continue;
            const double hv = hrow[j];
            const double* wcol = base + static_cast<int64_t>(jr) * hop;
            for (int r = 0; r < len; ++r) oseg[r] += wcol[r] * hv;
          }
        }
      }
    }
  }
}

void frame_conv_backward_weight(double* dw, double* dbias, const double* frames,
                                const double* dout, int B, int Ci, int Co, int F, int hop, int T,
                                int K) {
  if (K == 1) {
    // Reduce the output gradient per frame once, then take frame-rate dot
    // products against each input channel.
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < Co; ++oc) {
      const int nf = (T + hop - 1) / hop;
      std::vector<double> gsum(nf);
      double bacc = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* grow = crow(dout, b, oc, Co, T);
        for (int q = 0; q < nf; ++q) {
          double s = 0.0;
          const int t1 = std::min(T, (q + 1) * hop);
          for (int t = q * hop; t < t1; ++t) s += grow[t];
          gsum[q] = s;
          bacc += s;
        }
        for (int ic = 0; ic < Ci; ++ic) {
          const double* hrow = crow(frames, b, ic, Ci, F);
          double acc = 0.0;
          for (int q = 0; q < nf; ++q) acc += gsum[q] * hrow[q];
          dw[static_cast<int64_t>(oc) * Ci + ic] += acc;
        }
      }
      if (dbias) dbias[oc] += bacc;
    }
    return;
  }
  const int center = K / 2;
  const int jmin = floor_div(-center, hop);
  const int jmax = floor_div(hop - 1 + K - 1 - center, hop);
  const int nj = jmax - jmin + 1;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < Co; ++oc) {
    // Collapsed-lag gradient buffer, lag-major like the forward pass.
    std::vector<double> dwc(static_cast<size_t>(Ci) * hop * nj, 0.0);
    const int nf = (T + hop - 1) / hop;
    for (int b = 0; b < B; ++b) {
      const double* grow = crow(dout, b, oc, Co, T);
      for (int ic = 0; ic < Ci; ++ic) {
        const double* hrow = crow(frames, b, ic, Ci, F);
        double* base = dwc.data() + static_cast<int64_t>(ic) * hop * nj;
        for (int q = 0; q < nf; ++q) {
          const double* gseg = grow + static_cast<int64_t>(q) * hop;
          const int len = std::min(hop, T - q * hop);
          for (int jr = 0; jr < nj; ++jr) {
            const int j = q + jmin + jr;
            if (j < 0 || j >= F) continue;
            const double hv = hrow[j];
            double* dcol = base + static_cast<int64_t>(jr) * hop;
            for (int r = 0; r < len; ++r) dcol[r] += gseg[r] * hv;
          }
        }
      }
    }
    // Scatter collapsed-lag gradients back onto the kernel taps.
    for (int ic = 0; ic < Ci; ++ic) {
      const double* base = dwc.data() + static_cast<int64_t>(ic) * hop * nj;
      double* wrow = dw + (static_cast<int64_t>(oc) * Ci + ic) * K;
      for (int r = 0; r < hop; ++r)
        for (int k = 0; k < K; ++k) {
          int j = floor_div(r + k - center, hop);
          wrow[k] += base[static_cast<int64_t>(j - jmin) * hop + r];
        }
    }
    if (dbias) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* grow = crow(dout, b, oc, Co, T);
        for (int t = 0; t < T; ++t) acc += grow[t];
      }
      dbias[oc] += acc;
    }
  }
}

DftPlan make_dft_plan(int fft, int hop, int win, bool hann_window) {
  DftPlan p;
  p.fft = fft;
  p.hop = hop;
  p.win = win;
  p.bins = fft / 2 + 1;
  p.window.resize(win);
  for (int n = 0; n < win; ++n)
    p.window[n] = hann_window ? 0.5 * (1.0 - std::cos(2.0 * M_PI * n / win)) : 1.0;
  p.cos_t.resize(static_cast<size_t>(p.bins) * win);
  p.sin_t.resize(static_cast<size_t>(p.bins) * win);
  for (int k = 0; k < p.bins; ++k)
    for (int n = 0; n < win; ++n) {
      double ang = 2.0 * M_PI * k * n / fft;
      p.cos_t[static_cast<size_t>(k) * win + n] = std::cos(ang);
      p.sin_t[static_cast<size_t>(k) * win + n] = std::sin(ang);
    }
  return p;
}

void stft_forward(double* mag, double* re, double* im, const double* x, int n, const DftPlan& p) {
  const int F = num_frames(n, p);
  const int bins = p.bins;
#pragma omp parallel for schedule(static)
  for (int f = 0; f < F; ++f) {
    std::vector<double> xw(p.win);
    const double* seg = x + static_cast<int64_t>(f) * p.hop;
    for (int i = 0; i < p.win; ++i) xw[i] = p.window[i] * seg[i];
    for (int k = 0; k < bins; ++k) {
      const double* ct = p.cos_t.data() + static_cast<size_t>(k) * p.win;
      const double* st = p.sin_t.data() + static_cast<size_t>(k) * p.win;
      const double sre = dot8(xw.data(), ct, p.win);
      const double sim = -dot8(xw.data(), st, p.win);
      const int64_t idx = static_cast<int64_t>(f) * bins + k;
      re[idx] = sre;
      im[idx] = sim;
      mag[idx] = std::sqrt(sre * sre + sim * sim);
    }
  }
}

void stft_backward(double* dx, const double* dmag, const double* re, const double* im,
                   const double* mag, int n, const DftPlan& p) {
  const int F = num_frames(n, p);
  const int bins = p.bins;
  std::vector<double> local(static_cast<size_t>(F) * p.win, 0.0);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < F; ++f) {
    double* lf = local.data() + static_cast<size_t>(f) * p.win;
    for (int k = 0; k < bins; ++k) {
      const int64_t idx = static_cast<int64_t>(f) * bins + k;
      const double m = mag[idx];
      if (m <= 0.0) continue;  // subgradient zero at the origin
      const double a = dmag[idx] * re[idx] / m;
      const double bb = dmag[idx] * im[idx] / m;
      if (a == 0.0 && bb == 0.0) continue;
      const double* ct = p.cos_t.data() + static_cast<size_t>(k) * p.win;
      const double* st = p.sin_t.data() + static_cast<size_t>(k) * p.win;
      for (int i = 0; i < p.win; ++i) lf[i] += a * ct[i] - bb * st[i];
    }
  }
  // Overlapping frames share samples; scatter serially in frame order.
  for (int f = 0; f < F; ++f) {
    const double* lf = local.data() + static_cast<size_t>(f) * p.win;
    double* seg = dx + static_cast<int64_t>(f) * p.hop;
    for (int i = 0; i < p.win; ++i) seg[i] += p.window[i] * lf[i];
  }
}

}  // namespace vwgan::kernels

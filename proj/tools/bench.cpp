// Benchmarks the OpenMP kernels against the serial reference implementation
// and times one desk-scale training step.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "vwgan/corpus.hpp"
#include "vwgan/features.hpp"
#include "vwgan/kernels.hpp"
#include "vwgan/reference_kernels.hpp"
#include "vwgan/rng.hpp"
#include "vwgan/synthetic.hpp"
#include "vwgan/trainer.hpp"

using namespace vwgan;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double max_abs_diff(const double* a, const double* b, int64_t n) {
  double m = 0.0;
  for (int64_t i = 0; i < n; i++) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void bench_conv(int B, int Ci, int Co, int T, int K, int dil, int iters) {
  Rng rng(123);
  std::vector<double> x(static_cast<size_t>(B) * Ci * T), w(static_cast<size_t>(Co) * Ci * K),
      bias(Co);
  for (double& v : x) v = rng.gaussian();
  for (double& v : w) v = rng.gaussian() * 0.1;
  for (double& v : bias) v = rng.gaussian() * 0.01;

  std::vector<double> y(static_cast<size_t>(B) * Co * T);
  kernels::conv1d_forward(y.data(), x.data(), w.data(), bias.data(), B, Ci, Co, T, K, dil);
  std::vector<double> y_ref = ref::conv1d(x, w, bias, B, Ci, Co, T, K, dil);
  const double diff = max_abs_diff(y.data(), y_ref.data(), y.size());

  auto t0 = Clock::now();
  for (int i = 0; i < iters; i++)
    kernels::conv1d_forward(y.data(), x.data(), w.data(), bias.data(), B, Ci, Co, T, K, dil);
  const double omp_ms = ms_since(t0) / iters;
  t0 = Clock::now();
  for (int i = 0; i < iters; i++) y_ref = ref::conv1d(x, w, bias, B, Ci, Co, T, K, dil);
  const double ref_ms = ms_since(t0) / iters;
  std::printf("conv1d B=%d Ci=%-3d Co=%-3d T=%-5d K=%d d=%-3d  omp %8.3f ms  ref %8.3f ms  "
              "speedup %5.2fx  |diff| %.2e\n",
              B, Ci, Co, T, K, dil, omp_ms, ref_ms, ref_ms / omp_ms, diff);
}

void bench_stft(int fft, int hop, int win, int n, int iters) {
  Rng rng(5);
  std::vector<double> x(n);
  for (double& v : x) v = rng.gaussian() * 0.2;
  kernels::DftPlan plan = kernels::make_dft_plan(fft, hop, win, true);
  const int frames = kernels::num_frames(n, plan);
  const int bins = fft / 2 + 1;
  std::vector<double> mag(static_cast<size_t>(frames) * bins), re(mag.size()), im(mag.size());

  kernels::stft_forward(mag.data(), re.data(), im.data(), x.data(), n, plan);
  std::vector<double> mag_ref = ref::stft_magnitude(x, plan.window, fft, hop, win);
  const double diff = max_abs_diff(mag.data(), mag_ref.data(), mag.size());

  auto t0 = Clock::now();
  for (int i = 0; i < iters; i++)
    kernels::stft_forward(mag.data(), re.data(), im.data(), x.data(), n, plan);
  const double omp_ms = ms_since(t0) / iters;
  t0 = Clock::now();
  for (int i = 0; i < iters; i++) mag_ref = ref::stft_magnitude(x, plan.window, fft, hop, win);
  const double ref_ms = ms_since(t0) / iters;
  std::printf("stft fft=%-4d hop=%-3d win=%-4d n=%-5d       omp %8.3f ms  ref %8.3f ms  "
              "speedup %5.2fx  |diff| %.2e\n",
              fft, hop, win, n, omp_ms, ref_ms, ref_ms / omp_ms, diff);
}

void bench_desk_steps() {
  SyntheticSpec spec;
  spec.n_clips = 8;
  std::vector<SyntheticClip> clips = make_synthetic_corpus(spec);
  RunConfig cfg = desk_run_config();

  Corpus corpus;
  corpus.sample_rate = spec.sample_rate;
  corpus.hop = frame_hop(spec.sample_rate, spec.frame_shift_ms);
  for (size_t i = 0; i < clips.size(); i++) {
    CorpusItem item;
    item.wav_path = "mem";
    item.clip = clips[i].clip;
    item.feat = extract_features(clips[i].clip, spec.frame_shift_ms);
    corpus.items.push_back(std::move(item));
  }

  Trainer trainer(&corpus, cfg);
  auto time_steps = [&](int n) {
    auto t0 = Clock::now();
    for (int i = 0; i < n; i++) trainer.train_step();
    return ms_since(t0) / n;
  };
  trainer.train_step();  // warm-up
  const double freeze_ms = time_steps(3);
  while (trainer.step() < cfg.train.d_freeze_steps) trainer.train_step();
  trainer.train_step();  // warm-up
  const double joint_ms = time_steps(3);
  const TrainConfig& t = cfg.train;
  const double total_s =
      (t.d_freeze_steps * freeze_ms + (t.total_steps - t.d_freeze_steps) * joint_ms) / 1000.0;
  std::printf("desk train step: freeze %8.1f ms  joint %8.1f ms  projected full run %.1f s\n",
              freeze_ms, joint_ms, total_s);
}

}  // namespace

int main() {
  std::printf("== kernel benchmarks (OpenMP vs serial reference) ==\n");
  bench_conv(1, 16, 32, 4000, 3, 1, 5);
  bench_conv(1, 16, 32, 4000, 3, 64, 5);
  bench_conv(1, 64, 128, 4000, 5, 16, 3);
  bench_stft(256, 16, 128, 4000, 5);
  bench_stft(1024, 120, 600, 24000, 3);
  std::printf("\n== desk-scale training step ==\n");
  bench_desk_steps();
  return 0;
}

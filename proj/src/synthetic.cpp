#include "vwgan/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "vwgan/features.hpp"
#include "vwgan/rng.hpp"

namespace vwgan {

void SyntheticSpec::validate() const {
  check_sample_rate(sample_rate);
  if (n_clips <= 0) throw ValueError("synthetic spec needs at least one clip");
  if (clip_seconds <= 0.0) throw ValueError("synthetic clip_seconds must be positive");
  if (!(f0_lo_hz > 0.0) || f0_hi_hz < f0_lo_hz) throw ValueError("bad synthetic f0 range");
  if (f0_hi_hz * 3.0 >= sample_rate / 2.0)
    throw ValueError("third harmonic of f0_hi would alias at this sample rate");
  if (segment_seconds <= 0.0) throw ValueError("synthetic segment_seconds must be positive");
  if (crossfade_seconds < 0.0 || crossfade_seconds >= segment_seconds)
    throw ValueError("crossfade must be shorter than a segment");
}

namespace {

constexpr double kNoiseAmp = 0.1;  // uniform noise peak, -20 dBFS
constexpr double kHarmonicAmps[3] = {0.30, 0.15, 0.075};

struct Segment {
  int start, end;  // sample span [start, end)
  bool harmonic;
};

}  // namespace

std::vector<SyntheticClip> make_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(std::lround(spec.clip_seconds * spec.sample_rate));
  const int seg_len = static_cast<int>(std::lround(spec.segment_seconds * spec.sample_rate));
  const int half_fade = static_cast<int>(std::lround(spec.crossfade_seconds * spec.sample_rate)) / 2;
  const int hop = frame_hop(spec.sample_rate, spec.frame_shift_ms);
  const int win = 4 * hop;
  const int n_frames = (n + hop - 1) / hop;

  std::vector<SyntheticClip> corpus;
  corpus.reserve(spec.n_clips);
  for (int idx = 0; idx < spec.n_clips; idx++) {
    Rng rng(spec.seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(idx + 1));

    std::vector<Segment> plan;
    for (int start = 0, k = 0; start < n; start += seg_len, k++) {
      plan.push_back({start, std::min(start + seg_len, n), (idx + k) % 2 == 0});
    }

    SyntheticClip out;
    out.clip.sample_rate = spec.sample_rate;
    out.clip.samples.assign(n, 0.0);

    for (size_t k = 0; k < plan.size(); k++) {
      const Segment& seg = plan[k];
      const int lo = std::max(0, seg.start - half_fade);
      const int hi = std::min(n, seg.end + half_fade);
      std::vector<double> sig(hi - lo);
      if (seg.harmonic) {
        const double f0 = rng.uniform(spec.f0_lo_hz, spec.f0_hi_hz);
        const double env_freq = rng.uniform(1.0, 3.0);
        double phase[3], env_phase = rng.uniform(0.0, 2.0 * M_PI);
        for (double& p : phase) p = rng.uniform(0.0, 2.0 * M_PI);
        for (int t = lo; t < hi; t++) {
          const double tt = static_cast<double>(t - seg.start) / spec.sample_rate;
          const double env = 0.75 + 0.25 * std::sin(2.0 * M_PI * env_freq * tt + env_phase);
          double s = 0.0;
          for (int m = 0; m < 3; m++)
            s += kHarmonicAmps[m] * std::sin(2.0 * M_PI * f0 * (m + 1) * tt + phase[m]);
          sig[t - lo] = env * s;
        }
      } else {
        for (int t = lo; t < hi; t++) sig[t - lo] = rng.uniform(-kNoiseAmp, kNoiseAmp);
      }
      // Constant-gain linear crossfades of width 2*half_fade at interior
      // boundaries; weights of the two neighbors sum to one.
      for (int t = lo; t < hi; t++) {
        double w = 1.0;
        if (k > 0 && t < seg.start + half_fade)
          w = (t - (seg.start - half_fade) + 0.5) / (2.0 * half_fade);
        else if (k + 1 < plan.size() && t >= seg.end - half_fade)
          w = ((seg.end + half_fade) - t - 0.5) / (2.0 * half_fade);
        out.clip.samples[t] += w * sig[t - lo];
      }
    }

    out.vuv.resize(n_frames);
    out.crossfade.assign(n_frames, 0);
    for (int f = 0; f < n_frames; f++) {
      const int anchor = f * hop;
      for (const Segment& seg : plan) {
        if (anchor >= seg.start && anchor < seg.end) {
          out.vuv[f] = seg.harmonic ? 1 : 0;
          break;
        }
      }
      for (size_t k = 0; k + 1 < plan.size(); k++) {
        const int b = plan[k].end;
        if (anchor < b + half_fade && anchor + win > b - half_fade) {
          out.crossfade[f] = 1;
          break;
        }
      }
    }
    corpus.push_back(std::move(out));
  }
  return corpus;
}

}  // namespace vwgan

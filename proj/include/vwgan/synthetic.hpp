#pragma once

#include <cstdint>
#include <vector>

#include "vwgan/audio.hpp"

namespace vwgan {

// Alternating harmonic/noise clips with exact voicing labels. Even-indexed
// clips start with a harmonic segment, odd-indexed with noise; a spec whose
// segment_seconds covers the whole clip yields single-segment clips.
struct SyntheticSpec {
  uint64_t seed = 42;
  int n_clips = 64;
  double clip_seconds = 0.5;
  int sample_rate = 8000;
  double f0_lo_hz = 80.0;
  double f0_hi_hz = 240.0;
  double segment_seconds = 0.125;
  double crossfade_seconds = 0.020;
  double frame_shift_ms = 5.0;

  void validate() const;
};

struct SyntheticClip {
  AudioClip clip;
  std::vector<uint8_t> vuv;        // ground-truth frame labels from the plan
  std::vector<uint8_t> crossfade;  // 1 where the analysis window meets a fade
};

std::vector<SyntheticClip> make_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace vwgan

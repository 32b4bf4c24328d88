#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vwgan/audio.hpp"
#include "vwgan/tensor.hpp"

namespace vwgan {

// Frame-rate conditioning features. Layout per frame:
//   [0]      log-energy, dB re full scale, scaled by 1/20
//   [1]      zero-crossing rate, sign changes per sample in [0, 1]
//   [2..25]  24 band energies on a log-frequency axis, dB scaled by 1/20
//   [26]     V/UV flag (1 = voiced)
constexpr int kFeatureDim = 27;

constexpr double kEnergyThresholdDb = -60.0;  // V/UV energy gate, dBFS
constexpr double kZcrThreshold = 0.3;         // V/UV crossing-rate gate

struct ConditionFeatures {
  Tensor frames;              // [n_frames, kFeatureDim]
  std::vector<uint8_t> vuv;   // n_frames entries in {0,1}
  double frame_shift_ms = 5.0;

  int n_frames() const { return frames.rank() ? frames.dim(0) : 0; }
  int feat_dim() const { return frames.rank() ? frames.dim(1) : 0; }
};

// Frame hop in samples; throws if frame_shift_ms does not give an integer hop.
int frame_hop(int sample_rate, double frame_shift_ms);

// Extracts n_frames = ceil(n_samples / hop) frames, each analyzed over a
// 4*hop window starting at the frame position (zero padded past the end).
// A frame is voiced when log-energy > -60 dBFS and zcr < 0.3.
ConditionFeatures extract_features(const AudioClip& clip, double frame_shift_ms = 5.0);

// The feature vector extract_features yields on all-zero input; used to pad
// clips shorter than a training crop. Unvoiced by definition.
std::vector<double> silence_frame();

// Binary feature cache. Little-endian: magic "VWF1", u32 n_frames,
// u32 feat_dim, f32 frame_shift_ms, row-major f64 frames, n_frames vuv bytes.
void write_feature_cache(const std::string& path, const ConditionFeatures& feat);
ConditionFeatures read_feature_cache(const std::string& path);

}  // namespace vwgan

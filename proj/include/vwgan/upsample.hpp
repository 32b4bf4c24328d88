#pragma once

#include <cstdint>
#include <vector>

#include "vwgan/features.hpp"
#include "vwgan/tensor.hpp"

namespace vwgan {

// Complementary sample-level masks; v[i] + uv[i] == 1 everywhere.
struct VoicingMasks {
  std::vector<double> v;
  std::vector<double> uv;

  size_t n_samples() const { return v.size(); }
  int64_t active_v() const;
  int64_t active_uv() const;
};

// Nearest-neighbor feature upsampling: each frame repeated hop times.
// Output is channel-major [feat_dim, n_frames*hop], ready for conv input.
Tensor upsample_features(const ConditionFeatures& feat, int hop);

// V/UV flag upsampled by repetition; no learned layers on this path.
// Throws ValueError if vuv contains entries outside {0,1}.
VoicingMasks upsample_vuv(const std::vector<uint8_t>& vuv, int hop);

}  // namespace vwgan

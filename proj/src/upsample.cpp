#include "vwgan/upsample.hpp"

namespace vwgan {

int64_t VoicingMasks::active_v() const {
  int64_t n = 0;
  for (double x : v) n += x != 0.0;
  return n;
}

int64_t VoicingMasks::active_uv() const {
  int64_t n = 0;
  for (double x : uv) n += x != 0.0;
  return n;
}

Tensor upsample_features(const ConditionFeatures& feat, int hop) {
  if (hop < 1) throw ValueError("upsample hop must be >= 1");
  const int F = feat.n_frames();
  const int D = feat.feat_dim();
  Tensor out({D, F * hop});
  for (int d = 0; d < D; ++d) {
    double* dst = out.ptr() + static_cast<int64_t>(d) * F * hop;
    for (int f = 0; f < F; ++f) {
      const double v = feat.frames[static_cast<int64_t>(f) * D + d];
      for (int r = 0; r < hop; ++r) dst[f * hop + r] = v;
    }
  }
  return out;
}

VoicingMasks upsample_vuv(const std::vector<uint8_t>& vuv, int hop) {
  if (hop < 1) throw ValueError("upsample hop must be >= 1");
  VoicingMasks m;
  m.v.resize(vuv.size() * static_cast<size_t>(hop));
  m.uv.resize(m.v.size());
  for (size_t f = 0; f < vuv.size(); ++f) {
    if (vuv[f] > 1)
      throw ValueError("vuv entry " + std::to_string(vuv[f]) + " at frame " + std::to_string(f) +
                       " is outside {0,1}");
    const double v = vuv[f] ? 1.0 : 0.0;
    for (int r = 0; r < hop; ++r) {
      m.v[f * hop + r] = v;
      m.uv[f * hop + r] = 1.0 - v;
    }
  }
  return m;
}

}  // namespace vwgan

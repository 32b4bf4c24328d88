#include "vwgan/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "vwgan/kernels.hpp"

namespace vwgan {

namespace {

constexpr int kNumBands = 24;
constexpr double kBandLowHz = 50.0;
constexpr double kLogFloor = 1e-12;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Triangular filters with log-spaced edges from kBandLowHz to Nyquist.
// Returns [kNumBands][bins] weights.
std::vector<std::vector<double>> band_filters(int sample_rate, int fft, int bins) {
  const double f_hi = sample_rate / 2.0;
  std::vector<double> edges(kNumBands + 2);
  for (int i = 0; i < kNumBands + 2; ++i)
    edges[i] = kBandLowHz * std::pow(f_hi / kBandLowHz, static_cast<double>(i) / (kNumBands + 1));
  std::vector<std::vector<double>> filters(kNumBands, std::vector<double>(bins, 0.0));
  for (int b = 0; b < kNumBands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft;
      if (f <= lo || f >= hi) continue;
      filters[b][k] = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
  return filters;
}

}  // namespace

int frame_hop(int sample_rate, double frame_shift_ms) {
  const double h = sample_rate * frame_shift_ms / 1000.0;
  const double rounded = std::round(h);
  if (std::abs(h - rounded) > 1e-9 || rounded < 1.0)
    throw ValueError("frame shift " + std::to_string(frame_shift_ms) + " ms at " +
                     std::to_string(sample_rate) + " Hz gives non-integer hop " +
                     std::to_string(h));
  return static_cast<int>(rounded);
}

ConditionFeatures extract_features(const AudioClip& clip, double frame_shift_ms) {
  const int hop = frame_hop(clip.sample_rate, frame_shift_ms);
  const int n = static_cast<int>(clip.samples.size());
  if (n == 0) throw ValueError("cannot extract features from an empty clip");
  const int n_frames = (n + hop - 1) / hop;
  const int win = 4 * hop;
  const int fft = next_pow2(win);
  const int bins = fft / 2 + 1;

  const auto plan = kernels::make_dft_plan(fft, hop, win, true);
  const auto filters = band_filters(clip.sample_rate, fft, bins);

  ConditionFeatures out;
  out.frame_shift_ms = frame_shift_ms;
  out.frames = Tensor({n_frames, kFeatureDim});
  out.vuv.resize(n_frames);

  std::vector<double> frame(win);
  std::vector<double> mag(bins), re(bins), im(bins);
  for (int f = 0; f < n_frames; ++f) {
    const int start = f * hop;
    for (int i = 0; i < win; ++i)
      frame[i] = (start + i < n) ? clip.samples[static_cast<size_t>(start) + i] : 0.0;

    double energy = 0.0;
    for (int i = 0; i < win; ++i) energy += frame[i] * frame[i];
    const double log_e_db = 10.0 * std::log10(energy / win + kLogFloor);

    int crossings = 0;
    for (int i = 1; i < win; ++i)
      if (frame[i - 1] * frame[i] < 0.0) ++crossings;
    const double zcr = static_cast<double>(crossings) / (win - 1);

    kernels::stft_forward(mag.data(), re.data(), im.data(), frame.data(), win, plan);

    double* row = out.frames.ptr() + static_cast<int64_t>(f) * kFeatureDim;
    row[0] = log_e_db / 20.0;
    row[1] = zcr;
    for (int b = 0; b < kNumBands; ++b) {
      double e = 0.0;
      for (int k = 0; k < bins; ++k) e += filters[b][k] * mag[k] * mag[k];
      row[2 + b] = 10.0 * std::log10(e / win + kLogFloor) / 20.0;
    }
    const bool voiced = log_e_db > kEnergyThresholdDb && zcr < kZcrThreshold;
    out.vuv[f] = voiced ? 1 : 0;
    row[kFeatureDim - 1] = voiced ? 1.0 : 0.0;
  }
  return out;
}

std::vector<double> silence_frame() {
  std::vector<double> row(kFeatureDim, 0.0);
  const double floor_db = 10.0 * std::log10(kLogFloor) / 20.0;
  row[0] = floor_db;
  for (int b = 0; b < kNumBands; ++b) row[2 + b] = floor_db;
  return row;
}

void write_feature_cache(const std::string& path, const ConditionFeatures& feat) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open feature cache for writing: " + path);
  f.write("VWF1", 4);
  const uint32_t n_frames = static_cast<uint32_t>(feat.n_frames());
  const uint32_t feat_dim = static_cast<uint32_t>(feat.feat_dim());
  const float shift = static_cast<float>(feat.frame_shift_ms);
  f.write(reinterpret_cast<const char*>(&n_frames), 4);
  f.write(reinterpret_cast<const char*>(&feat_dim), 4);
  f.write(reinterpret_cast<const char*>(&shift), 4);
  f.write(reinterpret_cast<const char*>(feat.frames.ptr()),
          static_cast<std::streamsize>(feat.frames.numel() * sizeof(double)));
  f.write(reinterpret_cast<const char*>(feat.vuv.data()),
          static_cast<std::streamsize>(feat.vuv.size()));
  if (!f) throw IoError("failed writing feature cache: " + path);
}

ConditionFeatures read_feature_cache(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open feature cache: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "VWF1", 4) != 0)
    throw FormatError("bad feature cache magic in " + path);
  uint32_t n_frames = 0, feat_dim = 0;
  float shift = 0.0f;
  f.read(reinterpret_cast<char*>(&n_frames), 4);
  f.read(reinterpret_cast<char*>(&feat_dim), 4);
  f.read(reinterpret_cast<char*>(&shift), 4);
  if (!f || n_frames == 0 || feat_dim == 0)
    throw FormatError("bad feature cache header in " + path);
  ConditionFeatures out;
  out.frame_shift_ms = shift;
  out.frames = Tensor({static_cast<int>(n_frames), static_cast<int>(feat_dim)});
  f.read(reinterpret_cast<char*>(out.frames.ptr()),
         static_cast<std::streamsize>(out.frames.numel() * sizeof(double)));
  out.vuv.resize(n_frames);
  f.read(reinterpret_cast<char*>(out.vuv.data()), n_frames);
  if (!f) throw FormatError("truncated feature cache: " + path);
  for (uint8_t v : out.vuv)
    if (v > 1) throw FormatError("feature cache vuv entry outside {0,1} in " + path);
  return out;
}

}  // namespace vwgan

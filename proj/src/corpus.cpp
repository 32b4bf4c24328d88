#include "vwgan/corpus.hpp"

#include <filesystem>
#include <fstream>

#include "vwgan/wav.hpp"

namespace vwgan {

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open manifest for writing: " + path);
  for (const auto& [wav, cache] : entries) f << wav << '\t' << cache << '\n';
  if (!f) throw IoError("failed writing manifest: " + path);
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("manifest line " + std::to_string(lineno) + " has no tab separator");
    entries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (entries.empty()) throw FormatError("manifest is empty: " + path);
  return entries;
}

Corpus load_corpus(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  Corpus corpus;
  for (const auto& [wav_rel, cache_rel] : read_manifest(manifest_path)) {
    CorpusItem item;
    item.wav_path = resolve(wav_rel);
    item.clip = read_wav(item.wav_path);
    item.feat = read_feature_cache(resolve(cache_rel));

    const int hop = frame_hop(item.clip.sample_rate, item.feat.frame_shift_ms);
    const int expect =
        (static_cast<int>(item.clip.samples.size()) + hop - 1) / hop;
    if (item.feat.n_frames() != expect)
      throw FormatError("feature cache for " + item.wav_path + " has " +
                        std::to_string(item.feat.n_frames()) + " frames, clip needs " +
                        std::to_string(expect));
    if (corpus.items.empty()) {
      corpus.sample_rate = item.clip.sample_rate;
      corpus.hop = hop;
    } else {
      if (item.clip.sample_rate != corpus.sample_rate)
        throw FormatError("mixed sample rates in corpus (" + item.wav_path + ")");
      if (item.feat.feat_dim() != corpus.feat_dim())
        throw FormatError("mixed feature dims in corpus (" + item.wav_path + ")");
      if (hop != corpus.hop)
        throw FormatError("mixed frame hops in corpus (" + item.wav_path + ")");
    }
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

TrainingCrop crop_item(const CorpusItem& item, int hop, int start_frame, int clip_samples) {
  if (hop <= 0 || clip_samples <= 0 || clip_samples % hop != 0)
    throw ValueError("crop length " + std::to_string(clip_samples) +
                     " must be a positive multiple of hop " + std::to_string(hop));
  if (start_frame < 0) throw ValueError("negative crop start frame");
  const int n_frames = clip_samples / hop;
  const int feat_dim = item.feat.feat_dim();
  const int src_frames = item.feat.n_frames();
  const int src_samples = static_cast<int>(item.clip.samples.size());
  const int start_sample = start_frame * hop;

  TrainingCrop crop;
  crop.x = Tensor({clip_samples});
  for (int t = 0; t < clip_samples; t++) {
    const int s = start_sample + t;
    crop.x[t] = s < src_samples ? item.clip.samples[s] : 0.0;
  }

  crop.frames = Tensor({1, feat_dim, n_frames});
  crop.vuv.resize(n_frames);
  std::vector<double> pad = silence_frame();
  pad.resize(feat_dim, 0.0);
  for (int f = 0; f < n_frames; f++) {
    const int s = start_frame + f;
    const double* src = s < src_frames
                            ? item.feat.frames.ptr() + static_cast<int64_t>(s) * feat_dim
                            : pad.data();
    for (int c = 0; c < feat_dim; c++) crop.frames.row(0, c)[f] = src[c];
    crop.vuv[f] = s < src_frames ? item.feat.vuv[s] : 0;
  }
  return crop;
}

}  // namespace vwgan

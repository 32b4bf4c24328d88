#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vwgan/audio.hpp"
#include "vwgan/features.hpp"
#include "vwgan/tensor.hpp"

namespace vwgan {

struct CorpusItem {
  std::string wav_path;
  AudioClip clip;
  ConditionFeatures feat;
};

struct Corpus {
  std::vector<CorpusItem> items;
  int sample_rate = 0;
  int hop = 0;  // samples per feature frame

  int feat_dim() const { return items.empty() ? 0 : items[0].feat.feat_dim(); }
};

// Manifest: one "wav_path<TAB>cache_path" line per item. Relative paths are
// resolved against the manifest's directory.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path);

Corpus load_corpus(const std::string& manifest_path);

// A frame-aligned training example cut from one item. Crops starting past the
// end of the clip are zero-padded; padded frames carry silence features and
// count as unvoiced.
struct TrainingCrop {
  Tensor x;                  // [clip_samples]
  Tensor frames;             // [1, feat_dim, n_frames], channel-major
  std::vector<uint8_t> vuv;  // n_frames entries
};

TrainingCrop crop_item(const CorpusItem& item, int hop, int start_frame, int clip_samples);

}  // namespace vwgan

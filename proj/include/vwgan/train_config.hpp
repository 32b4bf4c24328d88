#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vwgan/discriminator.hpp"
#include "vwgan/generator.hpp"
#include "vwgan/stft.hpp"

namespace vwgan {

struct TrainConfig {
  int64_t total_steps = 400000;
  int64_t d_freeze_steps = 100000;
  int batch_size = 8;
  int clip_samples = 24000;
  double lr_init = 1e-4;
  int64_t lr_half_every = 200000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double lambda_adv = 4.0;
  uint64_t seed = 0;
  int64_t checkpoint_every = 500;
  int sample_rate = 24000;
  double frame_shift_ms = 5.0;
  std::vector<StftConfig> resolutions;  // empty -> default_resolutions(sample_rate)

  void validate() const;
  std::vector<StftConfig> effective_resolutions() const;
};

// lr_init * 0.5^floor(step / lr_half_every).
double lr_at(int64_t step, const TrainConfig& cfg);

// Everything one training run needs.
struct RunConfig {
  TrainConfig train;
  GeneratorConfig gen;
  VoicingAwareConfig disc;

  void validate() const;
};

RunConfig default_run_config();  // paper-scale constants
RunConfig desk_run_config();     // small single-core configuration

std::string serialize_run_config(const RunConfig& cfg);
// Missing keys fall back to default_run_config() values.
RunConfig parse_run_config_text(const std::string& text);
RunConfig read_run_config(const std::string& path);

}  // namespace vwgan

#pragma once

#include <iosfwd>
#include <string>

#include "vwgan/checkpoint.hpp"
#include "vwgan/corpus.hpp"
#include "vwgan/gan.hpp"
#include "vwgan/radam.hpp"
#include "vwgan/train_config.hpp"

namespace vwgan {

struct StepMetrics {
  int64_t step = 0;  // 1-based index of the completed step
  double lr = 0.0;
  double stft = 0.0;
  double adv_v = 0.0;
  double adv_uv = 0.0;
  double d_v = 0.0;
  double d_uv = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const StepMetrics& m);

// Two-phase adversarial trainer. One instance owns all parameters, optimizer
// state and the RNG stream; given the same corpus and seed, step sequences
// are bit-identical across runs.
class Trainer {
 public:
  Trainer(const Corpus* corpus, RunConfig cfg);
  // Resumes from a training checkpoint (parameters, moments, step, RNG).
  Trainer(const Corpus* corpus, const std::string& checkpoint_path);

  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  StepMetrics train_step();
  int64_t step() const { return step_; }
  bool done() const { return step_ >= cfg_.train.total_steps; }
  bool in_freeze_phase() const { return step_ < cfg_.train.d_freeze_steps; }
  const RunConfig& config() const { return cfg_; }

  void save_checkpoint(const std::string& path) const;

  GeneratorParams& gen_params() { return gen_; }
  VoicingAwareParams& disc_params() { return disc_; }
  const GeneratorParams& gen_params() const { return gen_; }
  const VoicingAwareParams& disc_params() const { return disc_; }

 private:
  void check_corpus() const;
  void init_optimizers();

  const Corpus* corpus_;
  RunConfig cfg_;
  StftLoss stft_loss_;
  GeneratorParams gen_;
  VoicingAwareParams disc_;
  RAdamConfig radam_;
  RAdamState opt_g_, opt_dv_, opt_duv_;
  Rng rng_;
  int64_t step_ = 0;
  int hop_ = 0;
};

// Runs the trainer to total_steps, appending metrics rows (with a header when
// starting fresh) to <outdir>/metrics.csv and writing ckpt_XXXXXX.vwg files
// every checkpoint_every steps and at the end.
void train_loop(Trainer& trainer, const std::string& outdir, std::ostream* console);

// Model bundle read back from any checkpoint (training or final).
struct ModelBundle {
  RunConfig cfg;
  GeneratorParams gen;
  VoicingAwareParams disc;
};
ModelBundle load_model(const std::string& checkpoint_path);

// Deterministic synthesis: z from the given seed, conditioning from feat.
AudioClip synthesize(const GeneratorParams& params, const GeneratorConfig& gcfg,
                     const ConditionFeatures& feat, int sample_rate, uint64_t seed);

}  // namespace vwgan

// Command-line front end: featurize | synth-corpus | train | synth | inspect
// | gradcheck. Exit codes: 0 ok, 1 usage, 2 missing/bad input, 3 numeric
// abort.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "vwgan/corpus.hpp"
#include "vwgan/grad_check.hpp"
#include "vwgan/stft.hpp"
#include "vwgan/synthetic.hpp"
#include "vwgan/train_config.hpp"
#include "vwgan/trainer.hpp"
#include "vwgan/wav.hpp"

namespace fs = std::filesystem;
using namespace vwgan;

namespace {

int64_t param_count(const GeneratorConfig& cfg) {
  GeneratorParams p = GeneratorParams::zeros(cfg);
  int64_t n = 0;
  visit_params(p, [&](const std::string&, Tensor& t) { n += t.numel(); });
  return n;
}

int64_t param_count(const DiscriminatorConfig& cfg) {
  DiscriminatorParams p = DiscriminatorParams::zeros(cfg);
  int64_t n = 0;
  visit_params(p, [&](const std::string&, Tensor& t) { n += t.numel(); });
  return n;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); i++) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

int cmd_inspect(const RunConfig& cfg) {
  const GeneratorConfig& g = cfg.gen;
  std::printf("generator: layers=%d cycles=%d kernel=%d residual_ch=%d skip_ch=%d aux_dim=%d\n",
              g.layers, g.cycles, g.kernel, g.residual_ch, g.skip_ch, g.aux_dim);
  std::printf("  dilations: %s\n", join_ints(g.dilations()).c_str());
  std::printf("  receptive field: %d\n", g.receptive_field());
  std::printf("  parameters: %lld\n", static_cast<long long>(param_count(g)));
  auto report_d = [](const char* name, const DiscriminatorConfig& d) {
    std::printf("discriminator (%s): layers=%d kernel=%d channels=%d conditional=%d\n", name,
                d.conv_layers, d.kernel, d.channels, d.conditional ? 1 : 0);
    std::printf("  dilations: %s\n", join_ints(d.dilations).c_str());
    std::printf("  receptive field: %d\n", d.receptive_field());
    std::printf("  parameters: %lld\n", static_cast<long long>(param_count(d)));
  };
  report_d("voiced", cfg.disc.voiced);
  report_d("unvoiced", cfg.disc.unvoiced);
  return 0;
}

int cmd_featurize(const std::string& wav, const std::string& out, const std::string& manifest,
                  double frame_shift_ms) {
  if (!manifest.empty()) {
    for (const auto& [wav_path, cache_path] : read_manifest(manifest)) {
      const fs::path base = fs::path(manifest).parent_path();
      auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? p : (base / p).string();
      };
      AudioClip clip = read_wav(resolve(wav_path));
      write_feature_cache(resolve(cache_path), extract_features(clip, frame_shift_ms));
      std::printf("featurized %s -> %s\n", wav_path.c_str(), cache_path.c_str());
    }
    return 0;
  }
  AudioClip clip = read_wav(wav);
  ConditionFeatures feat = extract_features(clip, frame_shift_ms);
  write_feature_cache(out, feat);
  std::printf("featurized %s: %d frames x %d dims -> %s\n", wav.c_str(), feat.n_frames(),
              feat.feat_dim(), out.c_str());
  return 0;
}

int cmd_synth_corpus(const SyntheticSpec& spec, const std::string& outdir) {
  fs::create_directories(outdir);
  std::vector<SyntheticClip> clips = make_synthetic_corpus(spec);
  std::vector<std::pair<std::string, std::string>> entries;
  for (size_t i = 0; i < clips.size(); i++) {
    char wav_name[32], cache_name[32];
    std::snprintf(wav_name, sizeof(wav_name), "clip_%03zu.wav", i);
    std::snprintf(cache_name, sizeof(cache_name), "clip_%03zu.vwf", i);
    write_wav(outdir + "/" + wav_name, clips[i].clip);
    // Features come from the extractor (not the plan labels) so training data
    // and real featurized audio go through the identical path.
    AudioClip reread = read_wav(outdir + "/" + wav_name);
    write_feature_cache(outdir + "/" + cache_name,
                        extract_features(reread, spec.frame_shift_ms));
    entries.emplace_back(wav_name, cache_name);
  }
  write_manifest(outdir + "/manifest.txt", entries);
  std::printf("wrote %zu clips + features + manifest to %s\n", clips.size(), outdir.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, bool desk, const std::string& manifest,
              const std::string& outdir, const std::string& resume, int64_t seed_override) {
  RunConfig cfg = desk ? desk_run_config()
                       : (config_path.empty() ? default_run_config() : read_run_config(config_path));
  if (seed_override >= 0) cfg.train.seed = static_cast<uint64_t>(seed_override);
  Corpus corpus = load_corpus(manifest);
  if (!resume.empty()) {
    Trainer trainer(&corpus, resume);
    train_loop(trainer, outdir, &std::cout);
    return 0;
  }
  Trainer trainer(&corpus, cfg);
  train_loop(trainer, outdir, &std::cout);
  return 0;
}

int cmd_synth(const std::string& ckpt, const std::string& features_path,
              const std::string& wav_path, const std::string& out, uint64_t seed,
              const std::string& dump_spec) {
  ModelBundle model = load_model(ckpt);
  ConditionFeatures feat;
  if (!features_path.empty()) {
    feat = read_feature_cache(features_path);
  } else {
    AudioClip src = read_wav(wav_path);
    if (src.sample_rate != model.cfg.train.sample_rate)
      throw FormatError("wav sample rate " + std::to_string(src.sample_rate) +
                        " != model sample rate " + std::to_string(model.cfg.train.sample_rate));
    feat = extract_features(src, model.cfg.train.frame_shift_ms);
  }
  AudioClip wave =
      synthesize(model.gen, model.cfg.gen, feat, model.cfg.train.sample_rate, seed);
  int64_t clamped = write_wav(out, wave);
  std::printf("synthesized %zu samples (%.3f s) -> %s", wave.samples.size(),
              wave.samples.size() / static_cast<double>(wave.sample_rate), out.c_str());
  if (clamped > 0) std::printf(" (%lld samples clamped)", static_cast<long long>(clamped));
  std::printf("\n");

  if (!dump_spec.empty()) {
    const StftConfig res = model.cfg.train.effective_resolutions().front();
    kernels::DftPlan plan = make_plan(res);
    Tensor mag = stft_magnitude_value(wave.samples, plan);
    std::ofstream f(dump_spec);
    if (!f) throw IoError("cannot open spectrogram dump: " + dump_spec);
    char buf[32];
    for (int fr = 0; fr < mag.dim(0); fr++) {
      for (int b = 0; b < mag.dim(1); b++) {
        std::snprintf(buf, sizeof(buf), "%.9g", mag.ptr()[static_cast<int64_t>(fr) * mag.dim(1) + b]);
        f << (b ? "," : "") << buf;
      }
      f << '\n';
    }
    std::printf("spectrogram: %d frames x %d bins -> %s\n", mag.dim(0), mag.dim(1),
                dump_spec.c_str());
  }
  return 0;
}

int cmd_gradcheck(uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](Tensor& t, double scale) {
    for (double& v : t.data) v = rng.gaussian() * scale;
  };
  double worst = 0.0;
  auto run = [&](const char* name, const ScalarGraphFn& fn, const Tensor& point) {
    const double err = grad_check(fn, point);
    worst = std::max(worst, err);
    std::printf("%-28s max rel err %.3e\n", name, err);
  };

  {
    Tensor x({1, 2, 16});
    fill(x, 1.0);
    run("conv1d input grad",
        [](Tape& t, Var v) {
          Tensor w({3, 2, 3});
          Rng r(7);
          for (double& x : w.data) x = r.gaussian();
          Var wv = t.leaf(w, false);
          Var b = t.leaf(Tensor({3}), false);
          return ops::sum(ops::tanh(ops::conv1d(v, wv, b, 2)));
        },
        x);
  }
  {
    Tensor w({2, 3, 3});
    fill(w, 0.5);
    run("conv1d weight grad",
        [](Tape& t, Var v) {
          Tensor x({1, 3, 12});
          Rng r(9);
          for (double& q : x.data) q = r.gaussian();
          Var xv = t.leaf(x, false);
          Var b = t.leaf(Tensor({2}), false);
          return ops::mean(ops::square(ops::conv1d(xv, v, b, 1)));
        },
        w);
  }
  {
    Tensor x({64});
    fill(x, 0.3);
    run("stft magnitude grad",
        [](Tape&, Var v) {
          static kernels::DftPlan plan = kernels::make_dft_plan(32, 8, 32, true);
          return ops::sum(ops::stft_magnitude(v, plan));
        },
        x);
  }
  {
    Tensor x({48});
    fill(x, 0.2);
    run("multi-res stft loss grad",
        [](Tape& t, Var v) {
          static StftLoss loss({{16, 4, 8, WindowKind::hann}, {32, 8, 16, WindowKind::hann}});
          Tensor ref({48});
          Rng r(11);
          for (double& q : ref.data) q = 0.2 * r.gaussian();
          Var rv = t.leaf(ref, false);
          return multi_res_stft_loss(rv, v, loss);
        },
        x);
  }
  std::printf("worst case: %.3e (tolerance 1e-3)\n", worst);
  return worst < 1e-3 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voicing-aware parallel waveform GAN vocoder"};
  app.require_subcommand(1);

  auto* featurize = app.add_subcommand("featurize", "extract conditioning features from wav");
  std::string f_wav, f_out, f_manifest;
  double f_shift = 5.0;
  featurize->add_option("--wav", f_wav, "input wav file");
  featurize->add_option("--out", f_out, "output feature cache (.vwf)");
  featurize->add_option("--manifest", f_manifest, "manifest of wav<TAB>cache pairs to featurize");
  featurize->add_option("--frame-shift-ms", f_shift, "frame shift in ms")->capture_default_str();

  auto* synth_corpus = app.add_subcommand("synth-corpus", "generate the synthetic corpus");
  SyntheticSpec spec;
  std::string sc_outdir;
  synth_corpus->add_option("--outdir", sc_outdir, "output directory")->required();
  synth_corpus->add_option("--seed", spec.seed, "corpus seed")->capture_default_str();
  synth_corpus->add_option("--n-clips", spec.n_clips, "number of clips")->capture_default_str();
  synth_corpus->add_option("--clip-seconds", spec.clip_seconds, "clip length in seconds")
      ->capture_default_str();
  synth_corpus->add_option("--sample-rate", spec.sample_rate, "sample rate")
      ->capture_default_str();
  synth_corpus->add_option("--segment-seconds", spec.segment_seconds, "segment length")
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "train the vocoder");
  std::string t_config, t_manifest, t_outdir, t_resume;
  bool t_desk = false;
  int64_t t_seed = -1;
  train->add_option("--config", t_config, "key=value config file");
  train->add_flag("--desk", t_desk, "use the desk-scale preset configuration");
  train->add_option("--manifest", t_manifest, "corpus manifest")->required();
  train->add_option("--outdir", t_outdir, "output directory")->required();
  train->add_option("--resume", t_resume, "checkpoint to resume from");
  train->add_option("--seed", t_seed, "override training seed");

  auto* synth = app.add_subcommand("synth", "synthesize a waveform from features");
  std::string s_ckpt, s_feat, s_wav, s_out, s_dump;
  uint64_t s_seed = 0;
  synth->add_option("--checkpoint", s_ckpt, "model checkpoint")->required();
  synth->add_option("--features", s_feat, "feature cache to condition on");
  synth->add_option("--wav", s_wav, "wav to copy features from");
  synth->add_option("--out", s_out, "output wav path")->required();
  synth->add_option("--seed", s_seed, "noise seed")->capture_default_str();
  synth->add_option("--dump-spec", s_dump, "write |STFT| matrix CSV here");

  auto* inspect = app.add_subcommand("inspect", "report architecture constants");
  std::string i_config;
  bool i_desk = false;
  inspect->add_option("--config", i_config, "key=value config file");
  inspect->add_flag("--desk", i_desk, "inspect the desk-scale preset");

  auto* gradcheck = app.add_subcommand("gradcheck", "run the built-in gradient checks");
  uint64_t g_seed = 1;
  gradcheck->add_option("--seed", g_seed, "probe seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (featurize->parsed()) {
      if (f_manifest.empty() && (f_wav.empty() || f_out.empty())) {
        std::fprintf(stderr, "featurize needs --manifest or both --wav and --out\n");
        return 1;
      }
      return cmd_featurize(f_wav, f_out, f_manifest, f_shift);
    }
    if (synth_corpus->parsed()) return cmd_synth_corpus(spec, sc_outdir);
    if (train->parsed()) {
      if (t_desk && !t_config.empty()) {
        std::fprintf(stderr, "train: --desk and --config are mutually exclusive\n");
        return 1;
      }
      return cmd_train(t_config, t_desk, t_manifest, t_outdir, t_resume, t_seed);
    }
    if (synth->parsed()) {
      if (s_feat.empty() == s_wav.empty()) {
        std::fprintf(stderr, "synth needs exactly one of --features or --wav\n");
        return 1;
      }
      return cmd_synth(s_ckpt, s_feat, s_wav, s_out, s_seed, s_dump);
    }
    if (inspect->parsed()) {
      RunConfig cfg = i_desk ? desk_run_config()
                             : (i_config.empty() ? default_run_config() : read_run_config(i_config));
      return cmd_inspect(cfg);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(g_seed);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "missing input: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return 2;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return 2;
  } catch (const ValueError& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return 2;
  }
  return 1;
}

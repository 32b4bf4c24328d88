#include "vwgan/train_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vwgan/kv.hpp"
#include "vwgan/radam.hpp"

namespace vwgan {

void TrainConfig::validate() const {
  if (total_steps <= 0) throw ValueError("total_steps must be positive");
  if (d_freeze_steps < 0 || d_freeze_steps >= total_steps)
    throw ValueError("d_freeze_steps must lie in [0, total_steps)");
  if (batch_size <= 0) throw ValueError("batch_size must be positive");
  if (clip_samples <= 0) throw ValueError("clip_samples must be positive");
  if (lr_init <= 0.0) throw ValueError("lr_init must be positive");
  if (lr_half_every <= 0) throw ValueError("lr_half_every must be positive");
  if (lambda_adv < 0.0) throw ValueError("lambda_adv must be non-negative");
  if (checkpoint_every <= 0) throw ValueError("checkpoint_every must be positive");
  check_sample_rate(sample_rate);
  RAdamConfig radam{beta1, beta2, eps};
  radam.validate();
  for (const auto& r : effective_resolutions()) {
    r.validate();
    if (clip_samples < r.win_size)
      throw ValueError("clip_samples " + std::to_string(clip_samples) +
                       " shorter than stft window " + std::to_string(r.win_size));
  }
}

std::vector<StftConfig> TrainConfig::effective_resolutions() const {
  return resolutions.empty() ? default_resolutions(sample_rate) : resolutions;
}

double lr_at(int64_t step, const TrainConfig& cfg) {
  if (step < 0) throw ValueError("lr_at: negative step");
  return cfg.lr_init * std::pow(0.5, static_cast<double>(step / cfg.lr_half_every));
}

void RunConfig::validate() const {
  train.validate();
  gen.validate();
  disc.validate();
  if (gen.aux_dim != disc.voiced.aux_dim)
    throw ValueError("generator and discriminators disagree on aux_dim");
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.train.seed = 0;
  return cfg;
}

RunConfig desk_run_config() {
  RunConfig cfg;
  cfg.train.total_steps = 2000;
  cfg.train.d_freeze_steps = 300;
  cfg.train.batch_size = 4;
  cfg.train.clip_samples = 4000;
  cfg.train.seed = 42;
  cfg.train.sample_rate = 8000;
  cfg.gen.layers = 10;
  cfg.gen.cycles = 2;
  cfg.gen.residual_ch = 16;
  cfg.gen.skip_ch = 16;
  cfg.gen.kernel = 3;
  cfg.disc.voiced.channels = 16;
  cfg.disc.unvoiced.channels = 16;
  return cfg;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); i++) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> split_ints(const std::string& s, const std::string& key) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stoi(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw FormatError("config key '" + key + "' has a bad integer list: " + s);
    }
  }
  if (out.empty()) throw FormatError("config key '" + key + "' is an empty list");
  return out;
}

std::string join_resolutions(const std::vector<StftConfig>& rs) {
  std::string out;
  for (size_t i = 0; i < rs.size(); i++) {
    if (i) out += ',';
    out += std::to_string(rs[i].fft_size) + ':' + std::to_string(rs[i].hop_size) + ':' +
           std::to_string(rs[i].win_size);
  }
  return out;
}

std::vector<StftConfig> split_resolutions(const std::string& s) {
  std::vector<StftConfig> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    StftConfig r;
    if (std::sscanf(tok.c_str(), "%d:%d:%d", &r.fft_size, &r.hop_size, &r.win_size) != 3)
      throw FormatError("bad stft resolution triple: " + tok);
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::string serialize_run_config(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  const TrainConfig& t = cfg.train;
  kv.emplace_back("train.total_steps", std::to_string(t.total_steps));
  kv.emplace_back("train.d_freeze_steps", std::to_string(t.d_freeze_steps));
  kv.emplace_back("train.batch_size", std::to_string(t.batch_size));
  kv.emplace_back("train.clip_samples", std::to_string(t.clip_samples));
  kv.emplace_back("train.lr_init", format_double(t.lr_init));
  kv.emplace_back("train.lr_half_every", std::to_string(t.lr_half_every));
  kv.emplace_back("train.beta1", format_double(t.beta1));
  kv.emplace_back("train.beta2", format_double(t.beta2));
  kv.emplace_back("train.eps", format_double(t.eps));
  kv.emplace_back("train.lambda_adv", format_double(t.lambda_adv));
  kv.emplace_back("train.seed", std::to_string(t.seed));
  kv.emplace_back("train.checkpoint_every", std::to_string(t.checkpoint_every));
  kv.emplace_back("audio.sample_rate", std::to_string(t.sample_rate));
  kv.emplace_back("audio.frame_shift_ms", format_double(t.frame_shift_ms));
  kv.emplace_back("stft.resolutions", join_resolutions(t.effective_resolutions()));
  kv.emplace_back("gen.layers", std::to_string(cfg.gen.layers));
  kv.emplace_back("gen.cycles", std::to_string(cfg.gen.cycles));
  kv.emplace_back("gen.residual_ch", std::to_string(cfg.gen.residual_ch));
  kv.emplace_back("gen.skip_ch", std::to_string(cfg.gen.skip_ch));
  kv.emplace_back("gen.kernel", std::to_string(cfg.gen.kernel));
  kv.emplace_back("gen.aux_dim", std::to_string(cfg.gen.aux_dim));
  kv.emplace_back("disc.channels", std::to_string(cfg.disc.voiced.channels));
  kv.emplace_back("disc.kernel", std::to_string(cfg.disc.voiced.kernel));
  kv.emplace_back("disc.leaky_alpha", format_double(cfg.disc.voiced.leaky_alpha));
  kv.emplace_back("disc.conditional", cfg.disc.voiced.conditional ? "1" : "0");
  kv.emplace_back("disc_v.dilations", join_ints(cfg.disc.voiced.dilations));
  kv.emplace_back("disc_uv.dilations", join_ints(cfg.disc.unvoiced.dilations));
  return serialize_kv(kv);
}

RunConfig parse_run_config_text(const std::string& text) {
  const KvMap kv = parse_kv(text);
  RunConfig cfg = default_run_config();
  TrainConfig& t = cfg.train;
  t.total_steps = kv_get_int(kv, "train.total_steps", t.total_steps);
  t.d_freeze_steps = kv_get_int(kv, "train.d_freeze_steps", t.d_freeze_steps);
  t.batch_size = static_cast<int>(kv_get_int(kv, "train.batch_size", t.batch_size));
  t.clip_samples = static_cast<int>(kv_get_int(kv, "train.clip_samples", t.clip_samples));
  t.lr_init = kv_get_double(kv, "train.lr_init", t.lr_init);
  t.lr_half_every = kv_get_int(kv, "train.lr_half_every", t.lr_half_every);
  t.beta1 = kv_get_double(kv, "train.beta1", t.beta1);
  t.beta2 = kv_get_double(kv, "train.beta2", t.beta2);
  t.eps = kv_get_double(kv, "train.eps", t.eps);
  t.lambda_adv = kv_get_double(kv, "train.lambda_adv", t.lambda_adv);
  t.seed = static_cast<uint64_t>(kv_get_int(kv, "train.seed", static_cast<int64_t>(t.seed)));
  t.checkpoint_every = kv_get_int(kv, "train.checkpoint_every", t.checkpoint_every);
  t.sample_rate = static_cast<int>(kv_get_int(kv, "audio.sample_rate", t.sample_rate));
  t.frame_shift_ms = kv_get_double(kv, "audio.frame_shift_ms", t.frame_shift_ms);
  if (kv.count("stft.resolutions"))
    t.resolutions = split_resolutions(kv.at("stft.resolutions"));
  cfg.gen.layers = static_cast<int>(kv_get_int(kv, "gen.layers", cfg.gen.layers));
  cfg.gen.cycles = static_cast<int>(kv_get_int(kv, "gen.cycles", cfg.gen.cycles));
  cfg.gen.residual_ch = static_cast<int>(kv_get_int(kv, "gen.residual_ch", cfg.gen.residual_ch));
  cfg.gen.skip_ch = static_cast<int>(kv_get_int(kv, "gen.skip_ch", cfg.gen.skip_ch));
  cfg.gen.kernel = static_cast<int>(kv_get_int(kv, "gen.kernel", cfg.gen.kernel));
  cfg.gen.aux_dim = static_cast<int>(kv_get_int(kv, "gen.aux_dim", cfg.gen.aux_dim));
  int dch = static_cast<int>(kv_get_int(kv, "disc.channels", cfg.disc.voiced.channels));
  int dk = static_cast<int>(kv_get_int(kv, "disc.kernel", cfg.disc.voiced.kernel));
  double dla = kv_get_double(kv, "disc.leaky_alpha", cfg.disc.voiced.leaky_alpha);
  bool dcond = kv_get_int(kv, "disc.conditional", cfg.disc.voiced.conditional ? 1 : 0) != 0;
  for (DiscriminatorConfig* d : {&cfg.disc.voiced, &cfg.disc.unvoiced}) {
    d->channels = dch;
    d->kernel = dk;
    d->leaky_alpha = dla;
    d->conditional = dcond;
    d->aux_dim = cfg.gen.aux_dim;
  }
  if (kv.count("disc_v.dilations")) {
    cfg.disc.voiced.dilations = split_ints(kv.at("disc_v.dilations"), "disc_v.dilations");
    cfg.disc.voiced.conv_layers = static_cast<int>(cfg.disc.voiced.dilations.size());
  }
  if (kv.count("disc_uv.dilations")) {
    cfg.disc.unvoiced.dilations = split_ints(kv.at("disc_uv.dilations"), "disc_uv.dilations");
    cfg.disc.unvoiced.conv_layers = static_cast<int>(cfg.disc.unvoiced.dilations.size());
  }
  cfg.validate();
  return cfg;
}

RunConfig read_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config_text(ss.str());
}

}  // namespace vwgan

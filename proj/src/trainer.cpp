#include "vwgan/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "vwgan/kv.hpp"
#include "vwgan/upsample.hpp"

namespace vwgan {

std::string metrics_csv_header() { return "step,lr,stft,adv_v,adv_uv,d_v,d_uv"; }

std::string metrics_csv_row(const StepMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                static_cast<long long>(m.step), m.lr, m.stft, m.adv_v, m.adv_uv, m.d_v, m.d_uv);
  return buf;
}

namespace {

struct ParamList {
  std::vector<Tensor*> params;
  std::vector<std::string> names;
};

ParamList list_params(GeneratorParams& p, const std::string& prefix) {
  ParamList out;
  visit_params(p, [&](const std::string& name, Tensor& t) {
    out.params.push_back(&t);
    out.names.push_back(prefix + name);
  });
  return out;
}

ParamList list_params(DiscriminatorParams& p, const std::string& prefix) {
  ParamList out;
  visit_params(p, [&](const std::string& name, Tensor& t) {
    out.params.push_back(&t);
    out.names.push_back(prefix + name);
  });
  return out;
}

std::vector<Tensor> zero_like(const ParamList& pl) {
  std::vector<Tensor> out;
  out.reserve(pl.params.size());
  for (const Tensor* p : pl.params) out.emplace_back(p->shape);
  return out;
}

void accumulate(std::vector<Tensor>& acc, const std::vector<const Tensor*>& grads) {
  for (size_t i = 0; i < acc.size(); i++) {
    const Tensor& g = *grads[i];
    for (int64_t j = 0; j < g.numel(); j++) acc[i].data[j] += g.data[j];
  }
}

void scale_all(std::vector<Tensor>& acc, double s) {
  for (Tensor& t : acc)
    for (double& v : t.data) v *= s;
}

std::vector<const Tensor*> as_ptrs(const std::vector<Tensor>& v) {
  std::vector<const Tensor*> out;
  out.reserve(v.size());
  for (const Tensor& t : v) out.push_back(&t);
  return out;
}

Tensor mask_b1t(const std::vector<double>& m) {
  Tensor t({1, 1, static_cast<int>(m.size())});
  t.data = m;
  return t;
}

// Mean of (1 - s)^2 over mask-active samples of a [1,1,T] score tensor.
double masked_one_minus_sq_mean(const Tensor& score, const std::vector<double>& mask,
                                int64_t active) {
  double sum = 0.0;
  for (size_t t = 0; t < mask.size(); t++) {
    if (mask[t] != 0.0) {
      const double d = 1.0 - score.data[t];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(active);
}

double masked_sq_mean(const Tensor& score, const std::vector<double>& mask, int64_t active) {
  double sum = 0.0;
  for (size_t t = 0; t < mask.size(); t++) {
    if (mask[t] != 0.0) sum += score.data[t] * score.data[t];
  }
  return sum / static_cast<double>(active);
}

Tensor masked_wave(const Tensor& wave_b1t, const std::vector<double>& mask) {
  Tensor out = wave_b1t;
  for (size_t t = 0; t < mask.size(); t++) out.data[t] *= mask[t];
  return out;
}

}  // namespace

Trainer::Trainer(const Corpus* corpus, RunConfig cfg)
    : corpus_(corpus),
      cfg_(std::move(cfg)),
      stft_loss_(cfg_.train.effective_resolutions()),
      gen_(GeneratorParams::zeros(cfg_.gen)),
      disc_{DiscriminatorParams::zeros(cfg_.disc.voiced),
            DiscriminatorParams::zeros(cfg_.disc.unvoiced)},
      radam_{cfg_.train.beta1, cfg_.train.beta2, cfg_.train.eps},
      rng_(cfg_.train.seed) {
  cfg_.validate();
  check_corpus();
  gen_ = GeneratorParams::init(cfg_.gen, rng_);
  disc_ = VoicingAwareParams::init(cfg_.disc, rng_);
  init_optimizers();
}

Trainer::Trainer(const Corpus* corpus, const std::string& checkpoint_path)
    : corpus_(corpus),
      cfg_(default_run_config()),
      stft_loss_(default_run_config().train.effective_resolutions()),
      gen_(GeneratorParams::zeros(cfg_.gen)),
      disc_{DiscriminatorParams::zeros(cfg_.disc.voiced),
            DiscriminatorParams::zeros(cfg_.disc.unvoiced)},
      radam_{cfg_.train.beta1, cfg_.train.beta2, cfg_.train.eps} {
  const Checkpoint ck = read_checkpoint(checkpoint_path);
  cfg_ = parse_run_config_text(ck.config_text);
  const KvMap kv = parse_kv(ck.config_text);
  stft_loss_ = StftLoss(cfg_.train.effective_resolutions());
  radam_ = RAdamConfig{cfg_.train.beta1, cfg_.train.beta2, cfg_.train.eps};
  check_corpus();

  gen_ = GeneratorParams::zeros(cfg_.gen);
  disc_.voiced = DiscriminatorParams::zeros(cfg_.disc.voiced);
  disc_.unvoiced = DiscriminatorParams::zeros(cfg_.disc.unvoiced);
  init_optimizers();

  auto load_into = [&](ParamList pl, RAdamState& st, const std::string& opt_prefix) {
    for (size_t i = 0; i < pl.params.size(); i++) {
      const Tensor& src = ck.find(pl.names[i]);
      if (src.shape != pl.params[i]->shape)
        throw FormatError("checkpoint tensor '" + pl.names[i] + "' has shape " +
                          shape_str(src.shape) + ", expected " +
                          shape_str(pl.params[i]->shape));
      *pl.params[i] = src;
      st.m[i] = ck.find(opt_prefix + "/m/" + pl.names[i]);
      st.v[i] = ck.find(opt_prefix + "/v/" + pl.names[i]);
    }
  };
  load_into(list_params(gen_, "gen/"), opt_g_, "opt/g");
  load_into(list_params(disc_.voiced, "dv/"), opt_dv_, "opt/dv");
  load_into(list_params(disc_.unvoiced, "duv/"), opt_duv_, "opt/duv");

  step_ = kv_get_int(kv, "state.step");
  opt_g_.t = kv_get_int(kv, "opt.g.t");
  opt_dv_.t = kv_get_int(kv, "opt.dv.t");
  opt_duv_.t = kv_get_int(kv, "opt.duv.t");
  rng_.deserialize(kv_get(kv, "state.rng"));
}

void Trainer::check_corpus() const {
  if (corpus_ == nullptr || corpus_->items.empty()) throw ValueError("trainer needs a corpus");
  if (corpus_->sample_rate != cfg_.train.sample_rate)
    throw ValueError("corpus sample rate " + std::to_string(corpus_->sample_rate) +
                     " != configured " + std::to_string(cfg_.train.sample_rate));
  if (corpus_->feat_dim() != cfg_.gen.aux_dim)
    throw ValueError("corpus feature dim " + std::to_string(corpus_->feat_dim()) +
                     " != configured aux_dim " + std::to_string(cfg_.gen.aux_dim));
  const int hop = frame_hop(cfg_.train.sample_rate, cfg_.train.frame_shift_ms);
  if (corpus_->hop != hop)
    throw ValueError("corpus frame hop " + std::to_string(corpus_->hop) + " != configured " +
                     std::to_string(hop));
  if (cfg_.train.clip_samples % hop != 0)
    throw ValueError("clip_samples must be a multiple of the frame hop " + std::to_string(hop));
}

void Trainer::init_optimizers() {
  hop_ = frame_hop(cfg_.train.sample_rate, cfg_.train.frame_shift_ms);
  ParamList g = list_params(gen_, "gen/");
  ParamList dv = list_params(disc_.voiced, "dv/");
  ParamList duv = list_params(disc_.unvoiced, "duv/");
  radam_init(opt_g_, g.params);
  radam_init(opt_dv_, dv.params);
  radam_init(opt_duv_, duv.params);
}

StepMetrics Trainer::train_step() {
  const TrainConfig& tc = cfg_.train;
  if (done()) throw ValueError("training already ran to total_steps");
  const bool freeze = in_freeze_phase();
  const double lr = lr_at(step_, tc);
  const double lambda = freeze ? 0.0 : tc.lambda_adv;
  const bool adv_in_graph = lambda > 0.0;
  const int B = tc.batch_size;
  const int T = tc.clip_samples;
  const int crop_frames = T / hop_;

  struct BatchItem {
    TrainingCrop crop;
    Tensor z;
    VoicingMasks masks;
    Tensor xhat;  // filled during the G update, [1,1,T]
  };
  std::vector<BatchItem> batch(B);
  for (int i = 0; i < B; i++) {
    const size_t idx = rng_.below(corpus_->items.size());
    const CorpusItem& item = corpus_->items[idx];
    const int max_start = item.feat.n_frames() - crop_frames;
    const int start = max_start > 0 ? static_cast<int>(rng_.below(max_start + 1)) : 0;
    batch[i].crop = crop_item(item, hop_, start, T);
    batch[i].z = Tensor({1, 1, T});
    for (double& v : batch[i].z.data) v = rng_.gaussian();
    batch[i].masks = upsample_vuv(batch[i].crop.vuv, hop_);
  }

  StepMetrics m;
  m.lr = lr;
  double stft_sum = 0, adv_v_sum = 0, adv_uv_sum = 0, d_v_sum = 0, d_uv_sum = 0;

  auto check_finite = [&](double v, const char* what) {
    if (!std::isfinite(v))
      throw NumericError("non-finite " + std::string(what) + " at step " +
                         std::to_string(step_ + 1) + " (stft=" + format_double(stft_sum) +
                         " adv_v=" + format_double(adv_v_sum) +
                         " adv_uv=" + format_double(adv_uv_sum) + ")");
  };

  // ---- generator update ----
  ParamList gpl = list_params(gen_, "gen/");
  std::vector<Tensor> gacc = zero_like(gpl);
  for (int i = 0; i < B; i++) {
    BatchItem& it = batch[i];
    Tape tape;
    LiftedGenerator gl = lift(tape, gen_, true);
    Var z = tape.leaf(it.z, false);
    Var xhat = generator_forward_frames(tape, z, it.crop.frames, hop_, gl, cfg_.gen);
    Var x1 = tape.leaf(it.crop.x, false);
    Var stft = multi_res_stft_loss(x1, ops::reshape(xhat, {T}), stft_loss_);
    const double stft_val = tape.val(stft)[0];

    Var total = stft;
    double adv_v_val = 0.0, adv_uv_val = 0.0;
    Tensor c_v, c_uv;
    if (cfg_.disc.voiced.conditional)
      c_v = condition_embedding_value(disc_.voiced, it.crop.frames, hop_, cfg_.disc.voiced);
    if (cfg_.disc.unvoiced.conditional)
      c_uv = condition_embedding_value(disc_.unvoiced, it.crop.frames, hop_, cfg_.disc.unvoiced);

    if (adv_in_graph) {
      // Adversarial terms with the current (pre-update) discriminators; their
      // embeddings enter as constants since no D gradient is needed here.
      auto adv_branch = [&](const DiscriminatorParams& dp, const DiscriminatorConfig& dc,
                            const Tensor& c, const std::vector<double>& mask_vec, int64_t active,
                            Var& out_var, double& out_val) {
        if (active == 0) {
          out_var = tape.leaf(Tensor::scalar(0.0), false);
          out_val = 0.0;
          return;
        }
        LiftedDiscriminator dl = lift(tape, dp, dc, false);
        Tensor mask = mask_b1t(mask_vec);
        Var psi = discriminator_features(tape, ops::mul_const(xhat, mask), dl, dc);
        Var score = dc.conditional ? projection_score_const(tape, psi, dl, c)
                                   : base_score(tape, psi, dl);
        score = ops::mul_const(score, mask);
        out_var = adversarial_loss_masked(score, mask, active);
        out_val = tape.val(out_var)[0];
      };
      Var adv_v, adv_uv;
      adv_branch(disc_.voiced, cfg_.disc.voiced, c_v, it.masks.v, it.masks.active_v(), adv_v,
                 adv_v_val);
      adv_branch(disc_.unvoiced, cfg_.disc.unvoiced, c_uv, it.masks.uv, it.masks.active_uv(),
                 adv_uv, adv_uv_val);
      total = ops::add(stft, ops::scale(ops::add(adv_v, adv_uv), lambda / 2.0));
    }

    stft_sum += stft_val;
    check_finite(stft_val, "stft loss");
    tape.backward(total);
    accumulate(gacc, lifted_grads(tape, gl));
    it.xhat = tape.val(xhat);

    if (!adv_in_graph) {
      // Reporting-only scores through the value path (no tape, no gradients).
      // During the freeze phase this also supplies the D losses; in a joint
      // step those come from the actual D update below.
      auto report = [&](const DiscriminatorParams& dp, const DiscriminatorConfig& dc,
                        const std::vector<double>& mask_vec, int64_t active, const Tensor& c,
                        double& adv_out, double* d_out) {
        if (active == 0) return;
        Tensor s_f = discriminator_score_value(dp, dc, masked_wave(it.xhat, mask_vec), c);
        adv_out = masked_one_minus_sq_mean(s_f, mask_vec, active);
        if (d_out != nullptr) {
          Tensor x_b1t({1, 1, T}, it.crop.x.data);
          Tensor s_r = discriminator_score_value(dp, dc, masked_wave(x_b1t, mask_vec), c);
          *d_out = masked_one_minus_sq_mean(s_r, mask_vec, active) +
                   masked_sq_mean(s_f, mask_vec, active);
        }
      };
      double d_v_val = 0.0, d_uv_val = 0.0;
      report(disc_.voiced, cfg_.disc.voiced, it.masks.v, it.masks.active_v(), c_v, adv_v_val,
             freeze ? &d_v_val : nullptr);
      report(disc_.unvoiced, cfg_.disc.unvoiced, it.masks.uv, it.masks.active_uv(), c_uv,
             adv_uv_val, freeze ? &d_uv_val : nullptr);
      d_v_sum += d_v_val;
      d_uv_sum += d_uv_val;
    }
    adv_v_sum += adv_v_val;
    adv_uv_sum += adv_uv_val;
    check_finite(adv_v_val, "adv_v");
    check_finite(adv_uv_val, "adv_uv");
  }
  scale_all(gacc, 1.0 / B);
  radam_step(gpl.params, as_ptrs(gacc), gpl.names, opt_g_, lr, radam_);

  // ---- discriminator updates (joint phase) ----
  if (!freeze) {
    ParamList dvpl = list_params(disc_.voiced, "dv/");
    ParamList duvpl = list_params(disc_.unvoiced, "duv/");
    std::vector<Tensor> dvacc = zero_like(dvpl), duvacc = zero_like(duvpl);
    for (int i = 0; i < B; i++) {
      BatchItem& it = batch[i];
      Tape tape;
      LiftedDiscriminator dvl = lift(tape, disc_.voiced, cfg_.disc.voiced, true);
      LiftedDiscriminator duvl = lift(tape, disc_.unvoiced, cfg_.disc.unvoiced, true);
      Tensor xhat_flat({T}, it.xhat.data);
      DiscriminatorLossParts parts = discriminator_step_loss(
          tape, it.crop.x, xhat_flat, it.crop.frames, hop_, it.masks, dvl, duvl, cfg_.disc);
      const double dv_val = tape.val(parts.d_v)[0];
      const double duv_val = tape.val(parts.d_uv)[0];
      check_finite(dv_val, "d_v");
      check_finite(duv_val, "d_uv");
      d_v_sum += dv_val;
      d_uv_sum += duv_val;
      tape.backward(parts.total);
      accumulate(dvacc, lifted_grads(tape, dvl));
      accumulate(duvacc, lifted_grads(tape, duvl));
    }
    scale_all(dvacc, 1.0 / B);
    scale_all(duvacc, 1.0 / B);
    radam_step(dvpl.params, as_ptrs(dvacc), dvpl.names, opt_dv_, lr, radam_);
    radam_step(duvpl.params, as_ptrs(duvacc), duvpl.names, opt_duv_, lr, radam_);
  }

  step_++;
  m.step = step_;
  m.stft = stft_sum / B;
  m.adv_v = adv_v_sum / B;
  m.adv_uv = adv_uv_sum / B;
  m.d_v = d_v_sum / B;
  m.d_uv = d_uv_sum / B;
  return m;
}

void Trainer::save_checkpoint(const std::string& path) const {
  std::string config = serialize_run_config(cfg_);
  std::vector<std::pair<std::string, std::string>> extra;
  extra.emplace_back("state.step", std::to_string(step_));
  extra.emplace_back("state.rng", rng_.serialize());
  extra.emplace_back("opt.g.t", std::to_string(opt_g_.t));
  extra.emplace_back("opt.dv.t", std::to_string(opt_dv_.t));
  extra.emplace_back("opt.duv.t", std::to_string(opt_duv_.t));
  config += serialize_kv(extra);

  auto& self = const_cast<Trainer&>(*this);
  ParamList g = list_params(self.gen_, "gen/");
  ParamList dv = list_params(self.disc_.voiced, "dv/");
  ParamList duv = list_params(self.disc_.unvoiced, "duv/");

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  auto add_all = [&](const ParamList& pl, const RAdamState& st, const std::string& opt_prefix) {
    for (size_t i = 0; i < pl.params.size(); i++) {
      tensors.emplace_back(pl.names[i], pl.params[i]);
      tensors.emplace_back(opt_prefix + "/m/" + pl.names[i], &st.m[i]);
      tensors.emplace_back(opt_prefix + "/v/" + pl.names[i], &st.v[i]);
    }
  };
  add_all(g, opt_g_, "opt/g");
  add_all(dv, opt_dv_, "opt/dv");
  add_all(duv, opt_duv_, "opt/duv");
  write_checkpoint(path, config, tensors);
}

void train_loop(Trainer& trainer, const std::string& outdir, std::ostream* console) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const std::string csv_path = outdir + "/metrics.csv";
  const bool fresh = trainer.step() == 0;
  std::ofstream csv(csv_path, fresh ? std::ios::trunc : std::ios::app);
  if (!csv) throw IoError("cannot open metrics file: " + csv_path);
  if (fresh) csv << metrics_csv_header() << '\n';

  const int64_t total = trainer.config().train.total_steps;
  const int64_t every = trainer.config().train.checkpoint_every;
  while (!trainer.done()) {
    StepMetrics m = trainer.train_step();
    csv << metrics_csv_row(m) << '\n';
    csv.flush();
    if (m.step % every == 0 || m.step == total) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%06lld.vwg", static_cast<long long>(m.step));
      trainer.save_checkpoint(outdir + "/" + name);
    }
    if (console != nullptr && (m.step % 100 == 0 || m.step == total)) {
      *console << "step " << m.step << "/" << total << " stft=" << m.stft << " d_v=" << m.d_v
               << " d_uv=" << m.d_uv << std::endl;
    }
  }
}

ModelBundle load_model(const std::string& checkpoint_path) {
  const Checkpoint ck = read_checkpoint(checkpoint_path);
  ModelBundle out;
  out.cfg = parse_run_config_text(ck.config_text);
  out.gen = GeneratorParams::zeros(out.cfg.gen);
  out.disc.voiced = DiscriminatorParams::zeros(out.cfg.disc.voiced);
  out.disc.unvoiced = DiscriminatorParams::zeros(out.cfg.disc.unvoiced);
  auto load_into = [&](ParamList pl) {
    for (size_t i = 0; i < pl.params.size(); i++) {
      const Tensor& src = ck.find(pl.names[i]);
      if (src.shape != pl.params[i]->shape)
        throw FormatError("checkpoint tensor '" + pl.names[i] + "' has shape " +
                          shape_str(src.shape) + ", expected " + shape_str(pl.params[i]->shape));
      *pl.params[i] = src;
    }
  };
  load_into(list_params(out.gen, "gen/"));
  load_into(list_params(out.disc.voiced, "dv/"));
  load_into(list_params(out.disc.unvoiced, "duv/"));
  return out;
}

AudioClip synthesize(const GeneratorParams& params, const GeneratorConfig& gcfg,
                     const ConditionFeatures& feat, int sample_rate, uint64_t seed) {
  check_sample_rate(sample_rate);
  if (feat.feat_dim() != gcfg.aux_dim)
    throw ShapeError("features have dim " + std::to_string(feat.feat_dim()) +
                     ", generator expects " + std::to_string(gcfg.aux_dim));
  const int hop = frame_hop(sample_rate, feat.frame_shift_ms);
  const int F = feat.n_frames();
  const int T = F * hop;

  Tensor frames({1, gcfg.aux_dim, F});
  for (int f = 0; f < F; f++)
    for (int c = 0; c < gcfg.aux_dim; c++)
      frames.row(0, c)[f] = feat.frames.ptr()[static_cast<int64_t>(f) * gcfg.aux_dim + c];

  Tensor z({1, 1, T});
  Rng rng(seed);
  for (double& v : z.data) v = rng.gaussian();

  Tape tape;
  LiftedGenerator gl = lift(tape, params, false);
  Var xhat = generator_forward_frames(tape, tape.leaf(z, false), frames, hop, gl, gcfg);

  AudioClip out;
  out.sample_rate = sample_rate;
  out.samples = tape.val(xhat).data;
  return out;
}

}  // namespace vwgan

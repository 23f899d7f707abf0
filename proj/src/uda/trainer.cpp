#include "rainshift/uda/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "json.hpp"
#include "rainshift/core/check.hpp"
#include "rainshift/core/checkpoint.hpp"
#include "rainshift/i2i/translator.hpp"
#include "rainshift/seg/loss.hpp"

namespace fs = std::filesystem;

namespace rainshift::uda {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::none: return "none";
        case Strategy::batchwise: return "batchwise";
        case Strategy::wpl: return "wpl";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "none") return Strategy::none;
    if (s == "batchwise") return Strategy::batchwise;
    if (s == "wpl") return Strategy::wpl;
    throw ValidationError("unknown strategy '" + s + "' (expected none|batchwise|wpl)");
}

LrPair lr_schedule(int epoch, const UdaConfig& cfg) {
    check(epoch >= 0, "lr_schedule: epoch must be nonnegative");
    if (epoch >= cfg.epochs) return {cfg.enc_lr / 10.0, cfg.dec_lr / 10.0};
    const double factor = std::pow(0.5, epoch / cfg.lr_halving_epochs);
    return {cfg.enc_lr * factor, cfg.dec_lr * factor};
}

namespace {

class ModelTranslator : public ImageTranslator {
  public:
    explicit ModelTranslator(const std::string& path) : model_(i2i::TranslatorModel::load(path)) {}

    Image translate_fresh_style(const Image& img, Rng& rng) override {
        const i2i::StyleCode style = i2i::sample_style(model_.spec().style_dim, rng);
        return i2i::translate(model_, img, style);
    }

  private:
    i2i::TranslatorModel model_;
};

// Passes images through untouched and draws nothing from the RNG, so a
// p_translate=1 run with this stub consumes the same random stream as a
// p_translate=0 run.
class IdentityTranslator : public ImageTranslator {
  public:
    Image translate_fresh_style(const Image& img, Rng&) override { return img; }
};

}  // namespace

std::unique_ptr<ImageTranslator> make_model_translator(const std::string& checkpoint_path) {
    return std::make_unique<ModelTranslator>(checkpoint_path);
}

std::unique_ptr<ImageTranslator> make_identity_translator() {
    return std::make_unique<IdentityTranslator>();
}

LoadedSet load_set(const datasets::DatasetManifest& m, bool with_labels) {
    LoadedSet set;
    set.images.reserve(m.samples.size());
    for (const auto& rec : m.samples) {
        set.images.push_back(load_image(rec.image_ref));
        if (with_labels) {
            check(!rec.label_ref.empty(), "sample " + rec.image_ref + " has no label");
            set.labels.push_back(load_label(rec.label_ref));
        }
    }
    return set;
}

UdaTrainer::UdaTrainer(LoadedSet src, LoadedSet tgt, const UdaConfig& cfg,
                       std::unique_ptr<ImageTranslator> translator)
    : cfg_(cfg),
      src_(std::move(src)),
      tgt_(std::move(tgt)),
      translator_(std::move(translator)),
      net_([&] {
          Rng init_rng(cfg.seed ^ 0x5e6eULL);
          return seg::SegNet(cfg.model, init_rng);
      }()),
      opt_enc_(net_.encoder_params(), cfg.enc_lr, cfg.momentum),
      opt_dec_(net_.decoder_params(), cfg.dec_lr, cfg.momentum),
      theta_(wpl::ThresholdParam::from_alpha(cfg.wpl.alpha_init)),
      rng_(cfg.seed) {
    check(!src_.images.empty(), "uda: source set is empty");
    check(src_.labels.size() == src_.images.size(), "uda: source set must be fully labeled");
    check(!tgt_.images.empty(), "uda: target set is empty");
    check(cfg.epochs >= 0 && cfg.refine_epochs >= 0, "uda: negative epoch counts");
    check(cfg.enc_lr > 0 && cfg.dec_lr > 0, "uda: learning rates must be positive");
    check(cfg.paths.p_tp >= 0 && cfg.paths.p_tp <= 1 && cfg.paths.p_translate >= 0 &&
              cfg.paths.p_translate <= 1,
          "uda: path probabilities must be in [0,1]");
    check(translator_ != nullptr || cfg.paths.p_translate == 0.0,
          "uda: p_translate > 0 requires a translator checkpoint");
    cfg_.augment.crop_h = cfg_.crop_h;
    cfg_.augment.crop_w = cfg_.crop_w;
}

StepBreakdown UdaTrainer::step(const std::vector<int>& src_idx, const std::vector<int>& tgt_idx,
                               bool refine_phase, double u1, double p_pl) {
    StepBreakdown out;
    out.translate_fired = translator_ != nullptr && u1 < cfg_.paths.p_translate;
    const bool ss_enabled = refine_phase && cfg_.strategy != Strategy::none;
    out.ss_fired = ss_enabled && self_supervision_gate(p_pl, cfg_.paths.p_tp);
    out.alpha = theta_.alpha();

    const int batch = static_cast<int>(src_idx.size());
    check(batch > 0, "uda step: empty source batch");
    const double inv_batch = 1.0 / batch;

    opt_enc_.zero_grad();
    opt_dec_.zero_grad();

    // Supervised path on source (optionally re-rendered in the target
    // domain with a fresh style per image).
    for (int i = 0; i < batch; ++i) {
        const Image& orig = src_.images[src_idx[i]];
        const Image input_img =
            out.translate_fired ? translator_->translate_fresh_style(orig, rng_) : orig;
        const auto aug = datasets::sample_augment_params(cfg_.augment, rng_, input_img.h,
                                                         input_img.w);
        const Image x = datasets::apply_augment_image(input_img, aug, cfg_.augment);
        const LabelImage y = datasets::apply_augment_label(src_.labels[src_idx[i]], aug,
                                                           cfg_.augment);
        nn::Tape tape;
        const nn::Tensor logits = net_.forward_logits(seg::image_to_input(x), tape);
        seg::CeFromLogits ce = seg::supervised_ce_on_logits(logits, y);
        nn::scale_inplace(ce.dlogits, static_cast<float>(inv_batch));
        net_.backward(ce.dlogits, tape);
        out.l_ce += ce.loss * inv_batch;
    }

    // Self-supervised path on target.
    double d_beta = 0.0;
    if (out.ss_fired) {
        check(!tgt_idx.empty(), "uda step: self-supervised path fired with empty target batch");
        std::vector<Image> xs;
        xs.reserve(tgt_idx.size());
        for (int idx : tgt_idx) {
            const auto aug = datasets::sample_augment_params(cfg_.augment, rng_,
                                                             tgt_.images[idx].h,
                                                             tgt_.images[idx].w);
            xs.push_back(datasets::apply_augment_image(tgt_.images[idx], aug, cfg_.augment));
        }
        const double inv_tgt = 1.0 / static_cast<double>(xs.size());

        std::vector<nn::Tape> tapes(xs.size());
        std::vector<wpl::ProbabilityMap> pms;
        pms.reserve(xs.size());
        std::vector<nn::Tensor> logits_batch;
        logits_batch.reserve(xs.size());
        for (size_t i = 0; i < xs.size(); ++i) {
            logits_batch.push_back(net_.forward_logits(seg::image_to_input(xs[i]), tapes[i]));
            pms.push_back(seg::softmax_probs(logits_batch[i]));
        }

        double coverage = 0.0;
        if (cfg_.strategy == Strategy::wpl) {
            for (size_t i = 0; i < xs.size(); ++i) {
                const wpl::WplLossResult res = wpl::wpl_loss(pms[i], theta_, cfg_.wpl);
                std::vector<double> d_p = res.d_p;
                for (auto& v : d_p) v *= inv_tgt;
                nn::Tensor dz = seg::probs_grad_to_logits(pms[i], d_p);
                net_.backward(dz, tapes[i]);
                d_beta += res.d_beta * inv_tgt;
                out.l_w += res.l_w * inv_tgt;
                out.l_b += res.l_b * inv_tgt;
                out.l_ss += res.l_ss * inv_tgt;
                coverage += evalm::pseudo_label_coverage(res.state) * inv_tgt;
            }
        } else {  // batchwise baseline: per-class batch medians, unit weights
            const auto states = wpl::batchwise_pseudo_label(pms);
            for (size_t i = 0; i < xs.size(); ++i) {
                const double l_pl = wpl::weighted_ce(pms[i], states[i], cfg_.wpl.normalization);
                const size_t n_inc = states[i].included_count();
                std::vector<double> d_p(pms[i].p.size(), 0.0);
                if (n_inc > 0) {
                    const double invn =
                        cfg_.wpl.normalization == wpl::LossNormalization::mean
                            ? 1.0 / static_cast<double>(n_inc)
                            : 1.0;
                    for (size_t u = 0; u < pms[i].pixels(); ++u) {
                        if (!states[i].included[u]) continue;
                        const int cls = states[i].classes[u];
                        const double ph = std::max(pms[i].p[u * pms[i].q + cls], 1e-12);
                        d_p[u * pms[i].q + cls] = -cfg_.wpl.sigma * invn / ph * inv_tgt;
                    }
                }
                nn::Tensor dz = seg::probs_grad_to_logits(pms[i], d_p);
                net_.backward(dz, tapes[i]);
                out.l_w += l_pl * inv_tgt;
                out.l_ss += cfg_.wpl.sigma * l_pl * inv_tgt;
                coverage += evalm::pseudo_label_coverage(states[i]) * inv_tgt;
            }
        }
        out.coverage = coverage;
    }

    if (!std::isfinite(out.l_ce) || !std::isfinite(out.l_ss))
        throw RuntimeFailure("uda step: non-finite loss (l_ce=" + std::to_string(out.l_ce) +
                             ", l_ss=" + std::to_string(out.l_ss) + ")");

    opt_enc_.step();
    opt_dec_.step();

    if (out.ss_fired && cfg_.strategy == Strategy::wpl) {
        beta_velocity_ = cfg_.wpl.alpha_momentum * beta_velocity_ + d_beta;
        theta_.beta -= cfg_.wpl.alpha_lr * beta_velocity_;
        out.alpha = theta_.alpha();
    }
    return out;
}

evalm::EvalReport UdaTrainer::evaluate(const LoadedSet& eval_set) const {
    check(eval_set.labels.size() == eval_set.images.size(), "evaluate: labels required");
    evalm::ConfusionMatrix cm(cfg_.model.class_count);
    for (size_t i = 0; i < eval_set.images.size(); ++i) {
        const wpl::ProbabilityMap pm = net_.predict_probs(eval_set.images[i]);
        accumulate_confusion(evalm::argmax_labels(pm), eval_set.labels[i], cm);
    }
    return evalm::evaluate_miou(cm);
}

void UdaTrainer::save_state(const std::string& path) const {
    CheckpointBlob blob;
    nlohmann::json desc;
    desc["kind"] = "uda_state";
    desc["epoch_next"] = epoch_;
    desc["beta"] = theta_.beta;
    desc["beta_velocity"] = beta_velocity_;
    desc["rng"] = rng_.serialize();
    desc["strategy"] = to_string(cfg_.strategy);
    desc["widths"] = cfg_.model.widths;
    desc["class_count"] = cfg_.model.class_count;
    blob.descriptor_json = desc.dump();
    auto params = const_cast<UdaTrainer*>(this)->net_.all_params();
    nn::save_params(params, blob, "seg");
    opt_enc_.save_state(blob, "oenc");
    opt_dec_.save_state(blob, "odec");
    blob.save(path);
}

void UdaTrainer::load_state(const std::string& path) {
    const CheckpointBlob blob = CheckpointBlob::load(path);
    const auto desc = nlohmann::json::parse(blob.descriptor_json);
    check(desc.value("kind", "") == "uda_state", path + ": not a training state file");
    check(desc.at("widths").get<std::vector<int>>() == cfg_.model.widths &&
              desc.at("class_count").get<int>() == cfg_.model.class_count,
          path + ": state was produced with a different model configuration");
    check(desc.at("strategy").get<std::string>() == to_string(cfg_.strategy),
          path + ": state was produced with a different strategy");
    epoch_ = desc.at("epoch_next").get<int>();
    theta_.beta = desc.at("beta").get<double>();
    beta_velocity_ = desc.at("beta_velocity").get<double>();
    rng_.deserialize(desc.at("rng").get<std::string>());
    auto params = net_.all_params();
    nn::load_params(params, blob, "seg");
    opt_enc_.load_state(blob, "oenc");
    opt_dec_.load_state(blob, "odec");
}

UdaRunResult UdaTrainer::run(const std::string& out_dir, const std::optional<LoadedSet>& eval_set,
                             const std::string& resume_state_path) {
    fs::create_directories(out_dir);
    if (!resume_state_path.empty()) load_state(resume_state_path);

    UdaRunResult res;
    res.checkpoint_path = (fs::path(out_dir) / "seg.ckpt").string();
    res.state_path = (fs::path(out_dir) / "state_final.ckpt").string();
    res.metrics_csv_path = (fs::path(out_dir) / "metrics.csv").string();

    CsvWriter csv(res.metrics_csv_path,
                  {"epoch", "step", "phase", "translate_fired", "ss_fired", "l_ce", "l_w", "l_b",
                   "l_ss", "alpha", "coverage", "miou"});

    const int n_src = static_cast<int>(src_.images.size());
    const int n_tgt = static_cast<int>(tgt_.images.size());
    const int batch = std::min(cfg_.batch_size, n_src);
    const int steps_per_epoch = std::max(1, n_src / batch);
    const int total_epochs = cfg_.epochs + cfg_.refine_epochs;

    for (; epoch_ < total_epochs; ++epoch_) {
        const bool refine = epoch_ >= cfg_.epochs;
        const LrPair lr = lr_schedule(epoch_, cfg_);
        opt_enc_.set_lr(lr.encoder);
        opt_dec_.set_lr(lr.decoder);

        const std::vector<int> perm_src = rng_.permutation(n_src);
        const std::vector<int> perm_tgt = rng_.permutation(n_tgt);

        for (int s = 0; s < steps_per_epoch; ++s) {
            std::vector<int> src_idx(batch), tgt_idx(batch);
            for (int i = 0; i < batch; ++i) {
                src_idx[i] = perm_src[(s * batch + i) % n_src];
                tgt_idx[i] = perm_tgt[(s * batch + i) % n_tgt];
            }
            const double u1 = rng_.uniform();
            const double p_pl = rng_.uniform();

            StepBreakdown br;
            try {
                br = step(src_idx, tgt_idx, refine, u1, p_pl);
            } catch (const RuntimeFailure&) {
                save_state((fs::path(out_dir) / "state_diag.ckpt").string());
                throw;
            }

            if (refine && br.coverage >= 0.0) res.refine_coverage.push_back(br.coverage);
            csv.write_row({CsvWriter::fmt(epoch_), CsvWriter::fmt(s),
                           refine ? "refine" : "main", br.translate_fired ? "1" : "0",
                           br.ss_fired ? "1" : "0", CsvWriter::fmt(br.l_ce),
                           CsvWriter::fmt(br.l_w), CsvWriter::fmt(br.l_b),
                           CsvWriter::fmt(br.l_ss), CsvWriter::fmt(br.alpha),
                           br.coverage >= 0.0 ? CsvWriter::fmt(br.coverage) : "",
                           ""});
        }

        if (eval_set && cfg_.eval_every > 0 &&
            ((epoch_ + 1) % cfg_.eval_every == 0 || epoch_ + 1 == total_epochs)) {
            const evalm::EvalReport rep = evaluate(*eval_set);
            res.evals.push_back({epoch_, rep.miou_all, rep.miou_defined, rep.pixel_accuracy});
            csv.write_row({CsvWriter::fmt(epoch_), "-1", "eval", "", "", "", "", "", "",
                           CsvWriter::fmt(theta_.alpha()), "", CsvWriter::fmt(rep.miou_all)});
        }
        if (cfg_.checkpoint_every > 0 && (epoch_ + 1) % cfg_.checkpoint_every == 0 &&
            epoch_ + 1 < total_epochs) {
            char name[64];
            std::snprintf(name, sizeof(name), "state_epoch%04d.ckpt", epoch_ + 1);
            // epoch_ is incremented after the loop body; persist the value
            // the resumed run should start from.
            ++epoch_;
            save_state((fs::path(out_dir) / name).string());
            --epoch_;
        }
        csv.flush();
    }

    net_.save(res.checkpoint_path);
    save_state(res.state_path);
    res.final_alpha = theta_.alpha();
    return res;
}

UdaRunResult run_uda_training(const UdaRunInputs& inputs, const UdaConfig& cfg,
                              const std::string& out_dir, const std::string& resume_state) {
    check(cfg.model.class_count == inputs.src.class_count,
          "uda: model class count does not match the source manifest");
    LoadedSet src = load_set(inputs.src, true);
    LoadedSet tgt = load_set(inputs.tgt, false);  // target labels are never used for training
    std::optional<LoadedSet> eval_set;
    if (inputs.eval_set) eval_set = load_set(*inputs.eval_set, true);

    std::unique_ptr<ImageTranslator> translator;
    if (!inputs.translator_checkpoint.empty())
        translator = make_model_translator(inputs.translator_checkpoint);

    UdaTrainer trainer(std::move(src), std::move(tgt), cfg, std::move(translator));
    return trainer.run(out_dir, eval_set, resume_state);
}

UdaRunResult run_baseline(Strategy strategy, const UdaRunInputs& inputs, UdaConfig cfg,
                          const std::string& out_dir) {
    cfg.strategy = strategy;
    return run_uda_training(inputs, cfg, out_dir);
}

}  // namespace rainshift::uda

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rainshift/core/csv.hpp"
#include "rainshift/core/image.hpp"
#include "rainshift/core/rng.hpp"
#include "rainshift/datasets/augment.hpp"
#include "rainshift/datasets/manifest.hpp"
#include "rainshift/evalm/metrics.hpp"
#include "rainshift/nn/optim.hpp"
#include "rainshift/seg/model.hpp"
#include "rainshift/wpl/wpl.hpp"

namespace rainshift::uda {

enum class Strategy { none, batchwise, wpl };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct PathPolicy {
    double p_tp = 0.75;        // self-supervision fires when p_pl > p_tp
    double p_translate = 0.5;  // supervised batch uses translated source
};

struct UdaConfig {
    int epochs = 100;         // main phase, self-supervision disabled
    int refine_epochs = 70;   // refinement phase with pseudo-labels
    int batch_size = 6;
    int crop_h = 512, crop_w = 512;
    double enc_lr = 1e-4;
    double dec_lr = 1e-3;
    double momentum = 0.9;
    int lr_halving_epochs = 33;
    wpl::WplLossConfig wpl;
    PathPolicy paths;
    datasets::AugmentConfig augment;  // crop fields are filled from crop_h/crop_w
    seg::SegNetConfig model;
    Strategy strategy = Strategy::wpl;
    uint64_t seed = 1;
    int eval_every = 1;       // epochs; 0 disables periodic evaluation
    int checkpoint_every = 0; // epochs; 0 saves only the final state
};

struct LrPair {
    double encoder = 0.0;
    double decoder = 0.0;
};

// The pseudo-label gate: self-supervision applies only when the uniform
// draw exceeds the threshold probability.
inline bool self_supervision_gate(double p_pl, double p_tp) { return p_pl > p_tp; }

// Main phase: base * 0.5^(epoch / halving interval). Refinement phase
// (epoch >= cfg.epochs): constant base / 10.
LrPair lr_schedule(int epoch, const UdaConfig& cfg);

// On-the-fly source->target translation used by the supervised path. The
// model-backed implementation draws a fresh style per image from the
// training RNG; test stubs may ignore the RNG entirely.
struct ImageTranslator {
    virtual ~ImageTranslator() = default;
    virtual Image translate_fresh_style(const Image& img, Rng& rng) = 0;
};

std::unique_ptr<ImageTranslator> make_model_translator(const std::string& checkpoint_path);
std::unique_ptr<ImageTranslator> make_identity_translator();

struct StepBreakdown {
    bool translate_fired = false;
    bool ss_fired = false;  // gate open AND self-supervision enabled this phase
    double l_ce = 0.0;
    double l_w = 0.0;
    double l_b = 0.0;
    double l_ss = 0.0;
    double alpha = 0.0;
    double coverage = -1.0;  // -1 when not computed this step
};

struct EpochEval {
    int epoch = 0;
    double miou_all = 0.0;
    double miou_defined = 0.0;
    double pixel_accuracy = 0.0;
};

struct UdaRunResult {
    std::string checkpoint_path;
    std::string state_path;
    std::string metrics_csv_path;
    std::vector<EpochEval> evals;
    std::vector<double> refine_coverage;  // per fired refinement step, in order
    double final_alpha = 0.0;
};

// In-memory training set. Labels are mandatory for the source, forbidden
// from use for the target (loaded only when the manifest doubles as an
// evaluation split elsewhere).
struct LoadedSet {
    std::vector<Image> images;
    std::vector<LabelImage> labels;  // empty for unlabeled sets
};

LoadedSet load_set(const datasets::DatasetManifest& m, bool with_labels);

class UdaTrainer {
  public:
    UdaTrainer(LoadedSet src, LoadedSet tgt, const UdaConfig& cfg,
               std::unique_ptr<ImageTranslator> translator);

    // One optimizer step. u1 gates the translation path, p_pl the
    // self-supervised path; both are compared against cfg.paths.
    StepBreakdown step(const std::vector<int>& src_idx, const std::vector<int>& tgt_idx,
                       bool refine_phase, double u1, double p_pl);

    // Full two-phase protocol with per-step metrics, periodic evaluation and
    // optional exact resume from a state file.
    UdaRunResult run(const std::string& out_dir, const std::optional<LoadedSet>& eval_set,
                     const std::string& resume_state_path = "");

    evalm::EvalReport evaluate(const LoadedSet& eval_set) const;

    double alpha() const { return theta_.alpha(); }
    double beta() const { return theta_.beta; }
    seg::SegNet& net() { return net_; }
    Rng& rng() { return rng_; }
    int next_epoch() const { return epoch_; }

    void save_state(const std::string& path) const;
    void load_state(const std::string& path);

  private:
    UdaConfig cfg_;
    LoadedSet src_, tgt_;
    std::unique_ptr<ImageTranslator> translator_;
    seg::SegNet net_;
    nn::SgdMomentum opt_enc_, opt_dec_;
    wpl::ThresholdParam theta_;
    double beta_velocity_ = 0.0;
    Rng rng_;
    int epoch_ = 0;
};

struct UdaRunInputs {
    datasets::DatasetManifest src;
    datasets::DatasetManifest tgt;
    std::optional<datasets::DatasetManifest> eval_set;
    std::string translator_checkpoint;  // empty disables the translation path
};

UdaRunResult run_uda_training(const UdaRunInputs& inputs, const UdaConfig& cfg,
                              const std::string& out_dir, const std::string& resume_state = "");

// Same harness with the pseudo-labeling strategy swapped in.
UdaRunResult run_baseline(Strategy strategy, const UdaRunInputs& inputs, UdaConfig cfg,
                          const std::string& out_dir);

}  // namespace rainshift::uda

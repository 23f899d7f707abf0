#pragma once

#include <string>

#include "rainshift/datasets/manifest.hpp"
#include "rainshift/i2i/translator.hpp"

namespace rainshift::i2i {

struct I2iTrainConfig {
    long iterations = 200000;  // toy runs configure a few thousand
    int batch_size = 1;
    int crop = 480;         // toy: 64
    int resize_height = 0;  // 0 keeps the stored size
    double lr = 1e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double w_adv = 1.0;
    double w_recon = 10.0;
    double w_style = 1.0;
    double w_content = 1.0;
    TranslatorSpec spec;
    uint64_t seed = 1;
    long log_every = 10;
};

struct I2iTrainResult {
    std::string checkpoint_path;
    std::string losses_csv_path;
    long iterations_run = 0;
};

// Bidirectional adversarial training with within-domain image reconstruction
// and latent style/content reconstruction. Deterministic given cfg.seed.
// Aborts with a diagnostic snapshot if any loss turns non-finite.
I2iTrainResult train_i2i(const datasets::DatasetManifest& a_bridged,
                         const datasets::DatasetManifest& b_bridged, const I2iTrainConfig& cfg,
                         const std::string& out_dir);

}  // namespace rainshift::i2i

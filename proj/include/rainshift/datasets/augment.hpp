#pragma once

#include <optional>

#include "rainshift/core/image.hpp"
#include "rainshift/core/rng.hpp"

namespace rainshift::datasets {

struct AugmentConfig {
    double scale_min = 0.5;
    double scale_max = 2.0;
    double flip_prob = 0.5;
    int crop_h = 0;  // 0 disables cropping
    int crop_w = 0;
};

struct AugmentParams {
    double scale = 1.0;
    bool flip = false;
    int off_y = 0;
    int off_x = 0;
};

AugmentParams sample_augment_params(const AugmentConfig& cfg, Rng& rng, int in_h, int in_w);

// Deterministic geometric transform: rescale (bilinear), optional horizontal
// flip, crop at the sampled offset. Out-of-bounds crop area is padded with 0.
Image apply_augment_image(const Image& img, const AugmentParams& p, const AugmentConfig& cfg);

// Same geometry with nearest-neighbor lookup; padding uses the ignore index.
LabelImage apply_augment_label(const LabelImage& lbl, const AugmentParams& p,
                               const AugmentConfig& cfg);

struct AugmentedSample {
    Image image;
    std::optional<LabelImage> label;
    AugmentParams params;
};

AugmentedSample augment_sample(const Image& img, const LabelImage* lbl, const AugmentConfig& cfg,
                               Rng& rng);

}  // namespace rainshift::datasets

#pragma once

#include <cstdint>
#include <string>

#include "rainshift/core/image.hpp"
#include "rainshift/datasets/manifest.hpp"

namespace rainshift::datasets {

struct RainParams {
    int droplet_count_min = 5;
    int droplet_count_max = 12;
    double droplet_radius_min = 2.0;  // px
    double droplet_radius_max = 4.0;  // px
    double darkening_factor = 0.5;    // multiplier in [0,1]
    double desaturation = 0.65;       // mix toward luma in [0,1]; overcast gray cast
    int blur_radius = 1;              // box blur, px
};

// Acquisition-setup look shared by the two bridge domains.
struct SetupParams {
    double hue_shift = 0.12;
    double vignette_strength = 0.3;
};

struct ToyWorldConfig {
    int image_h = 64, image_w = 64;
    int class_count = 4;  // background + shape classes
    double shape_density = 0.5;
    RainParams rain;
    SetupParams setup;
    uint64_t seed = 1;
};

enum class ToyDomain { source_clear, target_rain, bridge_clear, bridge_rain };

std::string to_string(ToyDomain d);

struct ToyRenderInfo {
    int shape_count = 0;
    int droplet_count = 0;
};

// Renders scene index `index` of the given domain: shapes with exact labels,
// then the setup transform for bridge domains and the rain transform for rain
// domains. Pure function of (cfg, domain, index).
void render_toy_sample(const ToyWorldConfig& cfg, ToyDomain domain, int index, Image& img,
                       LabelImage& lbl, ToyRenderInfo* info = nullptr);

// Writes n samples below out_dir (images/, labels/) and returns the manifest.
// Rain-domain samples keep their exact labels; callers decide whether to use
// them (target labels are held out for evaluation only).
DatasetManifest generate_toy_dataset(const ToyWorldConfig& cfg, int n, ToyDomain domain,
                                     const std::string& out_dir);

// The droplet primitive used by the rain transform, exposed so detector
// oracles can build templates from the exact generating process.
void render_droplet(Image& img, double cy, double cx, double radius);

}  // namespace rainshift::datasets

#pragma once

#include <vector>

#include "rainshift/core/image.hpp"
#include "rainshift/core/rng.hpp"
#include "rainshift/i2i/translator.hpp"

namespace rainshift::evalm {

// Mean over images of the mean pairwise per-pixel L1 distance between
// n_styles translations; a diversity proxy for the multimodal translator.
double style_diversity(i2i::TranslatorModel& model, const std::vector<Image>& images,
                       int n_styles, Rng& rng);

// Normalized cross-correlation detector against the droplet primitive of the
// toy rain transform; scans a few template radii spanning the given range and
// keeps the best response.
class DropletDetector {
  public:
    DropletDetector(double radius_min, double radius_max, double match_threshold = 0.52);

    double max_response(const Image& img) const;
    bool contains_droplet(const Image& img) const { return max_response(img) >= threshold_; }
    double threshold() const { return threshold_; }

  private:
    struct Template {
        int size = 0;
        std::vector<double> values;  // zero-mean, unit-norm grayscale
    };
    std::vector<Template> templates_;
    double threshold_;
};

double droplet_presence_rate(const std::vector<Image>& images, const DropletDetector& det);

}  // namespace rainshift::evalm

#pragma once

#include <vector>

#include "rainshift/core/rng.hpp"

namespace rainshift::i2i {

// Latent appearance vector with a standard-normal prior.
struct StyleCode {
    std::vector<float> values;

    int dim() const { return static_cast<int>(values.size()); }
};

StyleCode sample_style(int dim, Rng& rng);

double style_distance(const StyleCode& a, const StyleCode& b);

}  // namespace rainshift::i2i

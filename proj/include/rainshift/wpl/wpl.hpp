#pragma once

#include <cstdint>
#include <vector>

#include "rainshift/core/image.hpp"

namespace rainshift::wpl {

// Per-pixel class distribution, pixel-major layout: p[(y*w+x)*q + cls].
struct ProbabilityMap {
    int h = 0, w = 0, q = 0;
    std::vector<double> p;

    ProbabilityMap() = default;
    ProbabilityMap(int h_, int w_, int q_)
        : h(h_), w(w_), q(q_), p(static_cast<size_t>(h_) * w_ * q_, 0.0) {}

    double& at(int y, int x, int cls) { return p[(static_cast<size_t>(y) * w + x) * q + cls]; }
    double at(int y, int x, int cls) const { return p[(static_cast<size_t>(y) * w + x) * q + cls]; }

    size_t pixels() const { return static_cast<size_t>(h) * w; }

    // Nonnegative entries summing to 1 within tolerance at every pixel.
    void validate(double tol = 1e-5) const;
};

// Unconstrained threshold parameterization: alpha = sigmoid(beta).
struct ThresholdParam {
    double beta = 0.0;

    double alpha() const;
    static ThresholdParam from_alpha(double alpha);
};

struct PseudoLabelState {
    int h = 0, w = 0;
    std::vector<uint8_t> classes;   // argmax class per pixel
    std::vector<uint8_t> included;  // 1 iff max confidence >= alpha
    std::vector<double> weights;    // (max - alpha)/(1 - alpha) on included pixels, else 0

    size_t included_count() const;
};

enum class LossNormalization { mean, sum };

struct WplLossConfig {
    double sigma = 0.005;
    double gamma = 1.0;
    double alpha_init = 0.8;
    double alpha_lr = 0.01;
    double alpha_momentum = 0.9;
    LossNormalization normalization = LossNormalization::mean;
};

// Pseudo-label rule: include a pixel when its top confidence reaches alpha;
// the class is the argmax (ties broken toward the lowest index).
PseudoLabelState compute_pseudo_label(const ProbabilityMap& p, double alpha);

// Confidence-proportional weights; pixels at the threshold get weight 0, so
// inclusion-boundary crossings never change the loss discontinuously.
std::vector<double> compute_weights(const ProbabilityMap& p, double alpha);

// Weighted self-supervised cross-entropy over included pixels. With mean
// normalization the sum is divided by the included-pixel count (0 if none).
double weighted_ce(const ProbabilityMap& p, const PseudoLabelState& state,
                   LossNormalization norm = LossNormalization::mean);

// Balancing term log^2(1 - alpha); grows as alpha approaches 1.
double balancing_loss(double alpha);

struct WplLossResult {
    double l_ss = 0.0;
    double l_w = 0.0;
    double l_b = 0.0;
    // dL_ss/dbeta. The argmax classes and the inclusion mask are constants of
    // the step; the per-pixel confidence is a constant w.r.t. the network but
    // not w.r.t. alpha, so this includes the weight-matrix path.
    double d_beta = 0.0;
    // dL_ss/dp. Flows only through log(p[pseudo-class]) on included pixels;
    // the weights are treated as constants w.r.t. p.
    std::vector<double> d_p;
    PseudoLabelState state;
};

WplLossResult wpl_loss(const ProbabilityMap& p, const ThresholdParam& theta,
                       const WplLossConfig& cfg);

// Batch-wise baseline: per-class threshold at the median confidence of the
// batch pixels predicted as that class, strict inclusion, unit weights.
std::vector<PseudoLabelState> batchwise_pseudo_label(const std::vector<ProbabilityMap>& batch);

}  // namespace rainshift::wpl

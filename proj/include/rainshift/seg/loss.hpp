#pragma once

#include "rainshift/core/image.hpp"
#include "rainshift/nn/tensor.hpp"
#include "rainshift/wpl/wpl.hpp"

namespace rainshift::seg {

// Mean cross-entropy over non-ignored pixels, computed from probabilities.
// Returns 0 (with a warning) when every pixel is ignored.
double supervised_ce(const wpl::ProbabilityMap& p, const LabelImage& y);

struct CeFromLogits {
    double loss = 0.0;
    nn::Tensor dlogits;  // (p - onehot)/count on counted pixels, 0 elsewhere
    long counted = 0;
};

// Fused softmax + cross-entropy on logits, internals in double so the
// analytic gradient matches central finite differences tightly.
CeFromLogits supervised_ce_on_logits(const nn::Tensor& logits, const LabelImage& y);

// Maps dL/dp (sparse, from the self-supervised loss) through the softmax to
// dL/dlogits: dz_q = p_q * (dp_q - sum_r dp_r * p_r).
nn::Tensor probs_grad_to_logits(const wpl::ProbabilityMap& p, const std::vector<double>& d_p);

}  // namespace rainshift::seg

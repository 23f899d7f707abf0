#pragma once

#include <string>
#include <vector>

#include "rainshift/core/image.hpp"
#include "rainshift/core/rng.hpp"
#include "rainshift/nn/layers.hpp"
#include "rainshift/nn/tensor.hpp"
#include "rainshift/wpl/wpl.hpp"

namespace rainshift::seg {

struct SegNetConfig {
    std::vector<int> widths = {8, 16, 32};  // three encoder stages
    int class_count = 4;
};

// Three-stage encoder with a skip-connected decoder, plain convolutions
// (no normalization), logits at input resolution. Encoder and decoder are
// separate optimizer groups so they can train at different rates.
class SegNet {
  public:
    SegNet(const SegNetConfig& cfg, Rng& rng);

    nn::Tensor forward_logits(const nn::Tensor& x, nn::Tape& tape) const;
    void backward(const nn::Tensor& dlogits, nn::Tape& tape);

    wpl::ProbabilityMap predict_probs(const Image& img) const;

    std::vector<nn::Param*> encoder_params();
    std::vector<nn::Param*> decoder_params();
    std::vector<nn::Param*> all_params();

    const SegNetConfig& config() const { return cfg_; }

    void save(const std::string& path) const;
    static SegNet load(const std::string& path);

  private:
    SegNetConfig cfg_;
    nn::Conv2d stem_, down1_, down2_, mid_, conv_u1_, conv_u2_, head_;
    nn::Relu relu_;
    nn::Upsample2x up_;
};

// Image [0,1] -> centered network input tensor.
nn::Tensor image_to_input(const Image& img);

wpl::ProbabilityMap softmax_probs(const nn::Tensor& logits);

}  // namespace rainshift::seg

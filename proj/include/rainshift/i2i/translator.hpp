#pragma once

#include <array>
#include <string>
#include <vector>

#include "rainshift/core/image.hpp"
#include "rainshift/core/rng.hpp"
#include "rainshift/i2i/style.hpp"
#include "rainshift/nn/layers.hpp"

namespace rainshift::i2i {

struct TranslatorSpec {
    int style_dim = 8;
    int base_width = 8;  // content path widths: w, 2w, 4w
    int res_blocks = 2;  // style-modulated residual blocks in the decoder
    int disc_width = 16;
    int mlp_hidden = 32;
};

// Two stride-2 stages plus one plain residual block; emits the content code.
class ContentEncoder {
  public:
    ContentEncoder(const TranslatorSpec& spec, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x, nn::Tape& tape) const;
    nn::Tensor backward(const nn::Tensor& dy, nn::Tape& tape);
    void collect_params(std::vector<nn::Param*>& out);

  private:
    nn::Conv2d stem_, down1_, down2_, res1_, res2_;
    nn::InstanceNorm2d rn1_, rn2_;
    nn::Relu relu_;
};

class StyleEncoder {
  public:
    StyleEncoder(const TranslatorSpec& spec, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x, nn::Tape& tape) const;
    nn::Tensor backward(const nn::Tensor& dy, nn::Tape& tape);
    void collect_params(std::vector<nn::Param*>& out);

  private:
    nn::Conv2d c1_, c2_, c3_;
    nn::Relu relu_;
    nn::GlobalAvgPool pool_;
    nn::Linear fc_;
};

// Style-modulated decoder: an MLP maps the style code to per-channel affine
// modulation of the residual blocks, then two upsampling stages produce the
// output image in tanh range.
class Decoder {
  public:
    Decoder(const TranslatorSpec& spec, Rng& rng);
    nn::Tensor forward(const nn::Tensor& content, const nn::Tensor& style, nn::Tape& tape) const;
    // Returns {d_content, d_style}.
    std::pair<nn::Tensor, nn::Tensor> backward(const nn::Tensor& dy, nn::Tape& tape);
    void collect_params(std::vector<nn::Param*>& out);

  private:
    int width_;      // 4 * base_width
    int n_blocks_;
    nn::Linear mlp1_, mlp2_;
    std::vector<nn::Conv2d> block_convs_;  // 2 per block
    std::vector<nn::AdaptiveInstanceNorm2d> block_norms_;
    nn::Conv2d up_conv1_, up_conv2_, out_conv_;
    nn::InstanceNorm2d up_norm1_, up_norm2_;
    nn::Relu relu_;
    nn::Upsample2x up_;
    nn::Tanh tanh_;
};

class Discriminator {
  public:
    Discriminator(const TranslatorSpec& spec, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x, nn::Tape& tape) const;
    nn::Tensor backward(const nn::Tensor& dy, nn::Tape& tape);
    void collect_params(std::vector<nn::Param*>& out);

  private:
    nn::Conv2d c1_, c2_, c3_, head_;
    nn::LeakyRelu lrelu_;
};

enum class Domain : int { clear = 0, rain = 1 };

// The full bidirectional translator: per-domain content/style encoders,
// decoders and discriminators.
class TranslatorModel {
  public:
    TranslatorModel(const TranslatorSpec& spec, uint64_t init_seed);

    const TranslatorSpec& spec() const { return spec_; }

    ContentEncoder& enc_content(Domain d) { return enc_c_[int(d)]; }
    StyleEncoder& enc_style(Domain d) { return enc_s_[int(d)]; }
    Decoder& decoder(Domain d) { return dec_[int(d)]; }
    Discriminator& discriminator(Domain d) { return disc_[int(d)]; }

    std::vector<nn::Param*> generator_params();
    std::vector<nn::Param*> discriminator_params();

    void save(const std::string& path) const;
    static TranslatorModel load(const std::string& path);

  private:
    TranslatorSpec spec_;
    std::array<ContentEncoder, 2> enc_c_;
    std::array<StyleEncoder, 2> enc_s_;
    std::array<Decoder, 2> dec_;
    std::array<Discriminator, 2> disc_;
};

// Image [0,1] <-> tanh-range tensors.
nn::Tensor image_to_tanh_input(const Image& img);
Image tanh_output_to_image(const nn::Tensor& t);

// Deterministic translation of an image with the given style. Source domain
// content is re-rendered in the target domain; output matches the input size
// and stays in [0,1].
Image translate(TranslatorModel& model, const Image& img, const StyleCode& style,
                Domain from = Domain::clear, Domain to = Domain::rain);

// Style of an image as seen by the target-domain style encoder.
StyleCode encode_style(TranslatorModel& model, const Image& img, Domain d);

}  // namespace rainshift::i2i

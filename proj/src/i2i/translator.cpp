#include "rainshift/i2i/translator.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "rainshift/core/check.hpp"
#include "rainshift/core/checkpoint.hpp"
#include "rainshift/nn/optim.hpp"

namespace rainshift::i2i {

using nn::Tape;
using nn::Tensor;

StyleCode sample_style(int dim, Rng& rng) {
    check(dim >= 1, "sample_style: dim must be >= 1");
    StyleCode s;
    s.values.resize(dim);
    for (auto& v : s.values) v = static_cast<float>(rng.normal());
    return s;
}

double style_distance(const StyleCode& a, const StyleCode& b) {
    check(a.dim() == b.dim(), "style_distance: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        const double d = static_cast<double>(a.values[i]) - b.values[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// ContentEncoder

ContentEncoder::ContentEncoder(const TranslatorSpec& spec, Rng& rng)
    : stem_(3, spec.base_width, 3, 1, 1, rng),
      down1_(spec.base_width, 2 * spec.base_width, 3, 2, 1, rng),
      down2_(2 * spec.base_width, 4 * spec.base_width, 3, 2, 1, rng),
      res1_(4 * spec.base_width, 4 * spec.base_width, 3, 1, 1, rng),
      res2_(4 * spec.base_width, 4 * spec.base_width, 3, 1, 1, rng),
      rn1_(4 * spec.base_width),
      rn2_(4 * spec.base_width) {}

Tensor ContentEncoder::forward(const Tensor& x, Tape& tape) const {
    Tensor h = relu_.forward(stem_.forward(x, tape), tape);
    h = relu_.forward(down1_.forward(h, tape), tape);
    h = relu_.forward(down2_.forward(h, tape), tape);
    Tensor r = relu_.forward(rn1_.forward(res1_.forward(h, tape), tape), tape);
    r = rn2_.forward(res2_.forward(r, tape), tape);
    nn::add_inplace(r, h);
    return r;
}

Tensor ContentEncoder::backward(const Tensor& dy, Tape& tape) {
    Tensor d_h = res1_.backward(
        rn1_.backward(relu_.backward(res2_.backward(rn2_.backward(dy, tape), tape), tape), tape),
        tape);
    nn::add_inplace(d_h, dy);  // residual skip
    Tensor d = down2_.backward(relu_.backward(d_h, tape), tape);
    d = down1_.backward(relu_.backward(d, tape), tape);
    return stem_.backward(relu_.backward(d, tape), tape);
}

void ContentEncoder::collect_params(std::vector<nn::Param*>& out) {
    stem_.collect_params(out);
    down1_.collect_params(out);
    down2_.collect_params(out);
    res1_.collect_params(out);
    res2_.collect_params(out);
    rn1_.collect_params(out);
    rn2_.collect_params(out);
}

// ---------------------------------------------------------------------------
// StyleEncoder

StyleEncoder::StyleEncoder(const TranslatorSpec& spec, Rng& rng)
    : c1_(3, spec.base_width, 3, 2, 1, rng),
      c2_(spec.base_width, 2 * spec.base_width, 3, 2, 1, rng),
      c3_(2 * spec.base_width, 4 * spec.base_width, 3, 2, 1, rng),
      fc_(4 * spec.base_width, spec.style_dim, rng) {}

Tensor StyleEncoder::forward(const Tensor& x, Tape& tape) const {
    Tensor h = relu_.forward(c1_.forward(x, tape), tape);
    h = relu_.forward(c2_.forward(h, tape), tape);
    h = relu_.forward(c3_.forward(h, tape), tape);
    return fc_.forward(pool_.forward(h, tape), tape);
}

Tensor StyleEncoder::backward(const Tensor& dy, Tape& tape) {
    Tensor d = pool_.backward(fc_.backward(dy, tape), tape);
    d = c3_.backward(relu_.backward(d, tape), tape);
    d = c2_.backward(relu_.backward(d, tape), tape);
    return c1_.backward(relu_.backward(d, tape), tape);
}

void StyleEncoder::collect_params(std::vector<nn::Param*>& out) {
    c1_.collect_params(out);
    c2_.collect_params(out);
    c3_.collect_params(out);
    fc_.collect_params(out);
}

// ---------------------------------------------------------------------------
// Decoder

Decoder::Decoder(const TranslatorSpec& spec, Rng& rng)
    : width_(4 * spec.base_width),
      n_blocks_(spec.res_blocks),
      mlp1_(spec.style_dim, spec.mlp_hidden, rng),
      mlp2_(spec.mlp_hidden, spec.res_blocks * 2 * 2 * (4 * spec.base_width), rng),
      up_conv1_(4 * spec.base_width, 2 * spec.base_width, 3, 1, 1, rng),
      up_conv2_(2 * spec.base_width, spec.base_width, 3, 1, 1, rng),
      out_conv_(spec.base_width, 3, 3, 1, 1, rng),
      up_norm1_(2 * spec.base_width),
      up_norm2_(spec.base_width) {
    for (int b = 0; b < n_blocks_; ++b) {
        block_convs_.emplace_back(width_, width_, 3, 1, 1, rng);
        block_convs_.emplace_back(width_, width_, 3, 1, 1, rng);
        block_norms_.emplace_back(width_);
        block_norms_.emplace_back(width_);
    }
}

Tensor Decoder::forward(const Tensor& content, const Tensor& style, Tape& tape) const {
    check(content.c == width_, "Decoder: content width mismatch");
    // Style MLP -> raw modulation; scales are offset by 1 so a zero output
    // leaves features unscaled.
    Tensor hidden = relu_.forward(mlp1_.forward(style, tape), tape);
    Tensor raw = mlp2_.forward(hidden, tape);

    Tensor h = content;
    for (int b = 0; b < n_blocks_; ++b) {
        Tensor r = h;
        for (int j = 0; j < 2; ++j) {
            const int norm_idx = 2 * b + j;
            Tensor ss = Tensor::vec(2 * width_);
            const int off = norm_idx * 2 * width_;
            for (int c = 0; c < width_; ++c) {
                ss.data[c] = 1.f + raw.data[off + c];
                ss.data[width_ + c] = raw.data[off + width_ + c];
            }
            r = block_convs_[norm_idx].forward(r, tape);
            r = block_norms_[norm_idx].forward(r, ss, tape);
            if (j == 0) r = relu_.forward(r, tape);
        }
        nn::add_inplace(r, h);
        h = std::move(r);
    }

    h = relu_.forward(up_norm1_.forward(up_conv1_.forward(up_.forward(h, tape), tape), tape), tape);
    h = relu_.forward(up_norm2_.forward(up_conv2_.forward(up_.forward(h, tape), tape), tape), tape);
    return tanh_.forward(out_conv_.forward(h, tape), tape);
}

std::pair<Tensor, Tensor> Decoder::backward(const Tensor& dy, Tape& tape) {
    Tensor d = out_conv_.backward(tanh_.backward(dy, tape), tape);
    d = up_.backward(up_conv2_.backward(up_norm2_.backward(relu_.backward(d, tape), tape), tape),
                     tape);
    d = up_.backward(up_conv1_.backward(up_norm1_.backward(relu_.backward(d, tape), tape), tape),
                     tape);

    Tensor d_raw = Tensor::vec(n_blocks_ * 2 * 2 * width_);
    for (int b = n_blocks_ - 1; b >= 0; --b) {
        const Tensor d_skip = d;
        for (int j = 1; j >= 0; --j) {
            const int norm_idx = 2 * b + j;
            Tensor dss = Tensor::vec(2 * width_);
            if (j == 0) d = relu_.backward(d, tape);
            d = block_norms_[norm_idx].backward(d, tape, dss);
            d = block_convs_[norm_idx].backward(d, tape);
            const int off = norm_idx * 2 * width_;
            for (int c = 0; c < 2 * width_; ++c) d_raw.data[off + c] += dss.data[c];
        }
        nn::add_inplace(d, d_skip);
    }

    Tensor d_style = mlp1_.backward(relu_.backward(mlp2_.backward(d_raw, tape), tape), tape);
    return {std::move(d), std::move(d_style)};
}

void Decoder::collect_params(std::vector<nn::Param*>& out) {
    mlp1_.collect_params(out);
    mlp2_.collect_params(out);
    for (auto& c : block_convs_) c.collect_params(out);
    up_conv1_.collect_params(out);
    up_conv2_.collect_params(out);
    out_conv_.collect_params(out);
    up_norm1_.collect_params(out);
    up_norm2_.collect_params(out);
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(const TranslatorSpec& spec, Rng& rng)
    : c1_(3, spec.disc_width, 3, 2, 1, rng),
      c2_(spec.disc_width, 2 * spec.disc_width, 3, 2, 1, rng),
      c3_(2 * spec.disc_width, 4 * spec.disc_width, 3, 2, 1, rng),
      head_(4 * spec.disc_width, 1, 1, 1, 0, rng),
      lrelu_(0.2f) {}

Tensor Discriminator::forward(const Tensor& x, Tape& tape) const {
    Tensor h = lrelu_.forward(c1_.forward(x, tape), tape);
    h = lrelu_.forward(c2_.forward(h, tape), tape);
    h = lrelu_.forward(c3_.forward(h, tape), tape);
    return head_.forward(h, tape);
}

Tensor Discriminator::backward(const Tensor& dy, Tape& tape) {
    Tensor d = head_.backward(dy, tape);
    d = c3_.backward(lrelu_.backward(d, tape), tape);
    d = c2_.backward(lrelu_.backward(d, tape), tape);
    return c1_.backward(lrelu_.backward(d, tape), tape);
}

void Discriminator::collect_params(std::vector<nn::Param*>& out) {
    c1_.collect_params(out);
    c2_.collect_params(out);
    c3_.collect_params(out);
    head_.collect_params(out);
}

// ---------------------------------------------------------------------------
// TranslatorModel

namespace {

TranslatorSpec checked(const TranslatorSpec& spec) {
    check(spec.style_dim >= 1, "TranslatorSpec: style_dim must be >= 1");
    check(spec.base_width >= 1 && spec.disc_width >= 1 && spec.res_blocks >= 1,
          "TranslatorSpec: widths and block count must be positive");
    return spec;
}

}  // namespace

TranslatorModel::TranslatorModel(const TranslatorSpec& spec, uint64_t init_seed)
    : spec_(checked(spec)),
      enc_c_{[&] {
                 Rng r(init_seed);
                 return ContentEncoder(spec, r);
             }(),
             [&] {
                 Rng r(init_seed + 1);
                 return ContentEncoder(spec, r);
             }()},
      enc_s_{[&] {
                 Rng r(init_seed + 2);
                 return StyleEncoder(spec, r);
             }(),
             [&] {
                 Rng r(init_seed + 3);
                 return StyleEncoder(spec, r);
             }()},
      dec_{[&] {
               Rng r(init_seed + 4);
               return Decoder(spec, r);
           }(),
           [&] {
               Rng r(init_seed + 5);
               return Decoder(spec, r);
           }()},
      disc_{[&] {
                Rng r(init_seed + 6);
                return Discriminator(spec, r);
            }(),
            [&] {
                Rng r(init_seed + 7);
                return Discriminator(spec, r);
            }()} {}

std::vector<nn::Param*> TranslatorModel::generator_params() {
    std::vector<nn::Param*> out;
    for (int d = 0; d < 2; ++d) {
        enc_c_[d].collect_params(out);
        enc_s_[d].collect_params(out);
        dec_[d].collect_params(out);
    }
    return out;
}

std::vector<nn::Param*> TranslatorModel::discriminator_params() {
    std::vector<nn::Param*> out;
    for (int d = 0; d < 2; ++d) disc_[d].collect_params(out);
    return out;
}

void TranslatorModel::save(const std::string& path) const {
    CheckpointBlob blob;
    nlohmann::json desc;
    desc["kind"] = "i2i";
    desc["style_dim"] = spec_.style_dim;
    desc["base_width"] = spec_.base_width;
    desc["res_blocks"] = spec_.res_blocks;
    desc["disc_width"] = spec_.disc_width;
    desc["mlp_hidden"] = spec_.mlp_hidden;
    blob.descriptor_json = desc.dump();
    auto* self = const_cast<TranslatorModel*>(this);
    auto gen = self->generator_params();
    auto disc = self->discriminator_params();
    nn::save_params(gen, blob, "gen");
    nn::save_params(disc, blob, "disc");
    blob.save(path);
}

TranslatorModel TranslatorModel::load(const std::string& path) {
    const CheckpointBlob blob = CheckpointBlob::load(path);
    const auto desc = nlohmann::json::parse(blob.descriptor_json);
    check(desc.value("kind", "") == "i2i",
          path + ": checkpoint kind '" + desc.value("kind", "") + "' is not a translator");
    TranslatorSpec spec;
    spec.style_dim = desc.at("style_dim").get<int>();
    spec.base_width = desc.at("base_width").get<int>();
    spec.res_blocks = desc.at("res_blocks").get<int>();
    spec.disc_width = desc.at("disc_width").get<int>();
    spec.mlp_hidden = desc.at("mlp_hidden").get<int>();
    TranslatorModel model(spec, 0);
    auto gen = model.generator_params();
    auto disc = model.discriminator_params();
    nn::load_params(gen, blob, "gen");
    nn::load_params(disc, blob, "disc");
    return model;
}

Tensor image_to_tanh_input(const Image& img) {
    Tensor x(img.c, img.h, img.w);
    for (size_t i = 0; i < img.data.size(); ++i) x.data[i] = img.data[i] * 2.f - 1.f;
    return x;
}

Image tanh_output_to_image(const Tensor& t) {
    Image img(t.c, t.h, t.w);
    for (size_t i = 0; i < t.data.size(); ++i)
        img.data[i] = std::clamp(0.5f * (t.data[i] + 1.f), 0.f, 1.f);
    return img;
}

Image translate(TranslatorModel& model, const Image& img, const StyleCode& style, Domain from,
                Domain to) {
    check(img.c == 3, "translate: expected RGB image");
    check(img.h % 4 == 0 && img.w % 4 == 0, "translate: image size must be divisible by 4");
    check(style.dim() == model.spec().style_dim,
          "translate: style dimension " + std::to_string(style.dim()) + " does not match spec " +
              std::to_string(model.spec().style_dim));
    Tape tape;
    const Tensor content = model.enc_content(from).forward(image_to_tanh_input(img), tape);
    Tensor s = Tensor::vec(style.dim());
    s.data.assign(style.values.begin(), style.values.end());
    const Tensor out = model.decoder(to).forward(content, s, tape);
    return tanh_output_to_image(out);
}

StyleCode encode_style(TranslatorModel& model, const Image& img, Domain d) {
    Tape tape;
    const Tensor s = model.enc_style(d).forward(image_to_tanh_input(img), tape);
    StyleCode code;
    code.values.assign(s.data.begin(), s.data.end());
    return code;
}

}  // namespace rainshift::i2i

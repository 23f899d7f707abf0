#include "rainshift/seg/model.hpp"

#include <cmath>

#include "json.hpp"
#include "rainshift/core/check.hpp"
#include "rainshift/core/checkpoint.hpp"
#include "rainshift/nn/optim.hpp"

namespace rainshift::seg {

using nn::Tape;
using nn::Tensor;

SegNet::SegNet(const SegNetConfig& cfg, Rng& rng)
    : cfg_(cfg),
      stem_(3, cfg.widths.at(0), 3, 1, 1, rng),
      down1_(cfg.widths.at(0), cfg.widths.at(1), 3, 2, 1, rng),
      down2_(cfg.widths.at(1), cfg.widths.at(2), 3, 2, 1, rng),
      mid_(cfg.widths.at(2), cfg.widths.at(2), 3, 1, 1, rng),
      conv_u1_(cfg.widths.at(2) + cfg.widths.at(1), cfg.widths.at(1), 3, 1, 1, rng),
      conv_u2_(cfg.widths.at(1) + cfg.widths.at(0), cfg.widths.at(0), 3, 1, 1, rng),
      head_(cfg.widths.at(0), cfg.class_count, 1, 1, 0, rng) {
    check(cfg.widths.size() == 3, "SegNet: exactly three encoder widths expected");
    check(cfg.class_count >= 2, "SegNet: class count must be >= 2");
}

Tensor SegNet::forward_logits(const Tensor& x, Tape& tape) const {
    check(x.c == 3, "SegNet: expected 3-channel input");
    check(x.h % 4 == 0 && x.w % 4 == 0, "SegNet: input size must be divisible by 4");
    Tensor e0 = relu_.forward(stem_.forward(x, tape), tape);
    Tensor e1 = relu_.forward(down1_.forward(e0, tape), tape);
    Tensor e2 = relu_.forward(down2_.forward(e1, tape), tape);
    Tensor m = relu_.forward(mid_.forward(e2, tape), tape);
    Tensor um = up_.forward(m, tape);
    Tensor u1 = relu_.forward(conv_u1_.forward(nn::concat_channels(um, e1), tape), tape);
    Tensor uu = up_.forward(u1, tape);
    Tensor u2 = relu_.forward(conv_u2_.forward(nn::concat_channels(uu, e0), tape), tape);
    return head_.forward(u2, tape);
}

void SegNet::backward(const Tensor& dlogits, Tape& tape) {
    const int w0 = cfg_.widths[0], w1 = cfg_.widths[1], w2 = cfg_.widths[2];

    Tensor d_u2 = head_.backward(dlogits, tape);
    Tensor d_cat2 = conv_u2_.backward(relu_.backward(d_u2, tape), tape);
    Tensor d_uu, d_e0_skip;
    nn::split_channels(d_cat2, w1, d_uu, d_e0_skip);

    Tensor d_u1 = up_.backward(d_uu, tape);
    Tensor d_cat1 = conv_u1_.backward(relu_.backward(d_u1, tape), tape);
    Tensor d_um, d_e1_skip;
    nn::split_channels(d_cat1, w2, d_um, d_e1_skip);

    Tensor d_m = up_.backward(d_um, tape);
    Tensor d_e2 = mid_.backward(relu_.backward(d_m, tape), tape);
    Tensor d_e1 = down2_.backward(relu_.backward(d_e2, tape), tape);
    nn::add_inplace(d_e1, d_e1_skip);
    Tensor d_e0 = down1_.backward(relu_.backward(d_e1, tape), tape);
    nn::add_inplace(d_e0, d_e0_skip);
    stem_.backward(relu_.backward(d_e0, tape), tape);
}

wpl::ProbabilityMap SegNet::predict_probs(const Image& img) const {
    Tape tape;
    const Tensor logits = forward_logits(image_to_input(img), tape);
    return softmax_probs(logits);
}

std::vector<nn::Param*> SegNet::encoder_params() {
    std::vector<nn::Param*> p;
    stem_.collect_params(p);
    down1_.collect_params(p);
    down2_.collect_params(p);
    mid_.collect_params(p);
    return p;
}

std::vector<nn::Param*> SegNet::decoder_params() {
    std::vector<nn::Param*> p;
    conv_u1_.collect_params(p);
    conv_u2_.collect_params(p);
    head_.collect_params(p);
    return p;
}

std::vector<nn::Param*> SegNet::all_params() {
    auto p = encoder_params();
    auto d = decoder_params();
    p.insert(p.end(), d.begin(), d.end());
    return p;
}

void SegNet::save(const std::string& path) const {
    CheckpointBlob blob;
    nlohmann::json desc;
    desc["kind"] = "seg";
    desc["widths"] = cfg_.widths;
    desc["class_count"] = cfg_.class_count;
    blob.descriptor_json = desc.dump();
    auto params = const_cast<SegNet*>(this)->all_params();
    nn::save_params(params, blob, "seg");
    blob.save(path);
}

SegNet SegNet::load(const std::string& path) {
    const CheckpointBlob blob = CheckpointBlob::load(path);
    const auto desc = nlohmann::json::parse(blob.descriptor_json);
    check(desc.value("kind", "") == "seg",
          path + ": checkpoint kind '" + desc.value("kind", "") + "' is not a segmentation model");
    SegNetConfig cfg;
    cfg.widths = desc.at("widths").get<std::vector<int>>();
    cfg.class_count = desc.at("class_count").get<int>();
    Rng rng(0);
    SegNet net(cfg, rng);
    auto params = net.all_params();
    nn::load_params(params, blob, "seg");
    return net;
}

nn::Tensor image_to_input(const Image& img) {
    Tensor x(img.c, img.h, img.w);
    for (size_t i = 0; i < img.data.size(); ++i) x.data[i] = img.data[i] - 0.5f;
    return x;
}

wpl::ProbabilityMap softmax_probs(const Tensor& logits) {
    wpl::ProbabilityMap pm(logits.h, logits.w, logits.c);
    const size_t plane = static_cast<size_t>(logits.h) * logits.w;
    for (size_t u = 0; u < plane; ++u) {
        double maxv = -1e300;
        for (int c = 0; c < logits.c; ++c)
            maxv = std::max(maxv, static_cast<double>(logits.data[c * plane + u]));
        double sum = 0.0;
        for (int c = 0; c < logits.c; ++c) {
            const double e = std::exp(static_cast<double>(logits.data[c * plane + u]) - maxv);
            pm.p[u * logits.c + c] = e;
            sum += e;
        }
        for (int c = 0; c < logits.c; ++c) pm.p[u * logits.c + c] /= sum;
    }
    return pm;
}

}  // namespace rainshift::seg

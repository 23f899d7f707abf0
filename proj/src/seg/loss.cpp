#include "rainshift/seg/loss.hpp"

#include <cmath>
#include <iostream>

#include "rainshift/core/check.hpp"

namespace rainshift::seg {

namespace {
constexpr double kLogClamp = 1e-12;
}

double supervised_ce(const wpl::ProbabilityMap& p, const LabelImage& y) {
    check(p.h == y.h && p.w == y.w, "supervised_ce: shape mismatch");
    double acc = 0.0;
    long counted = 0;
    for (size_t u = 0; u < p.pixels(); ++u) {
        const uint8_t cls = y.data[u];
        if (cls == kIgnoreIndex) continue;
        check(cls < p.q, "supervised_ce: label " + std::to_string(int(cls)) + " out of range");
        acc += -std::log(std::max(p.p[u * p.q + cls], kLogClamp));
        ++counted;
    }
    if (counted == 0) {
        std::cerr << "warning: supervised_ce saw only ignored pixels\n";
        return 0.0;
    }
    return acc / static_cast<double>(counted);
}

CeFromLogits supervised_ce_on_logits(const nn::Tensor& logits, const LabelImage& y) {
    check(logits.h == y.h && logits.w == y.w, "supervised_ce_on_logits: shape mismatch");
    const int q = logits.c;
    const size_t plane = static_cast<size_t>(logits.h) * logits.w;

    CeFromLogits res;
    res.dlogits = nn::Tensor(logits.c, logits.h, logits.w);
    for (size_t u = 0; u < plane; ++u)
        if (y.data[u] != kIgnoreIndex) ++res.counted;
    if (res.counted == 0) {
        std::cerr << "warning: supervised_ce_on_logits saw only ignored pixels\n";
        return res;
    }
    const double invn = 1.0 / static_cast<double>(res.counted);

    std::vector<double> probs(q);
    for (size_t u = 0; u < plane; ++u) {
        const uint8_t cls = y.data[u];
        if (cls == kIgnoreIndex) continue;
        check(cls < q, "supervised_ce_on_logits: label out of range");
        double maxv = -1e300;
        for (int c = 0; c < q; ++c)
            maxv = std::max(maxv, static_cast<double>(logits.data[c * plane + u]));
        double sum = 0.0;
        for (int c = 0; c < q; ++c) {
            probs[c] = std::exp(static_cast<double>(logits.data[c * plane + u]) - maxv);
            sum += probs[c];
        }
        for (int c = 0; c < q; ++c) probs[c] /= sum;
        res.loss += -std::log(std::max(probs[cls], kLogClamp));
        for (int c = 0; c < q; ++c) {
            const double onehot = c == cls ? 1.0 : 0.0;
            res.dlogits.data[c * plane + u] = static_cast<float>((probs[c] - onehot) * invn);
        }
    }
    res.loss *= invn;
    return res;
}

nn::Tensor probs_grad_to_logits(const wpl::ProbabilityMap& p, const std::vector<double>& d_p) {
    check(d_p.size() == p.p.size(), "probs_grad_to_logits: gradient size mismatch");
    nn::Tensor dz(p.q, p.h, p.w);
    const size_t plane = p.pixels();
    for (size_t u = 0; u < plane; ++u) {
        double dot = 0.0;
        for (int c = 0; c < p.q; ++c) dot += d_p[u * p.q + c] * p.p[u * p.q + c];
        for (int c = 0; c < p.q; ++c)
            dz.data[c * plane + u] =
                static_cast<float>(p.p[u * p.q + c] * (d_p[u * p.q + c] - dot));
    }
    return dz;
}

}  // namespace rainshift::seg

#include "rainshift/wpl/wpl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rainshift/core/check.hpp"

namespace rainshift::wpl {

namespace {

constexpr double kLogClamp = 1e-12;
constexpr double kAlphaGuard = 1e-9;

void find_max(const double* px, int q, double& max_p, int& argmax) {
    max_p = px[0];
    argmax = 0;
    for (int c = 1; c < q; ++c) {
        if (px[c] > max_p) {  // ties keep the lowest class index
            max_p = px[c];
            argmax = c;
        }
    }
}

std::string pixel_coords(const ProbabilityMap& p, size_t u) {
    const int y = static_cast<int>(u / p.w);
    const int x = static_cast<int>(u % p.w);
    return "(" + std::to_string(y) + "," + std::to_string(x) + ")";
}

}  // namespace

void ProbabilityMap::validate(double tol) const {
    check(h > 0 && w > 0 && q > 0, "probability map: empty shape");
    for (size_t u = 0; u < pixels(); ++u) {
        double sum = 0.0;
        for (int c = 0; c < q; ++c) {
            const double v = p[u * q + c];
            check(v >= 0.0, "probability map: negative entry at pixel " + std::to_string(u));
            sum += v;
        }
        check(std::abs(sum - 1.0) <= tol,
              "probability map: pixel " + std::to_string(u) + " sums to " + std::to_string(sum));
    }
}

double ThresholdParam::alpha() const { return 1.0 / (1.0 + std::exp(-beta)); }

ThresholdParam ThresholdParam::from_alpha(double alpha) {
    check(alpha > 0.0 && alpha < 1.0, "threshold alpha must be in (0,1)");
    return ThresholdParam{std::log(alpha / (1.0 - alpha))};
}

size_t PseudoLabelState::included_count() const {
    size_t n = 0;
    for (uint8_t v : included) n += v;
    return n;
}

PseudoLabelState compute_pseudo_label(const ProbabilityMap& p, double alpha) {
    check(alpha > 0.0 && alpha < 1.0, "compute_pseudo_label: alpha must be in (0,1)");
    PseudoLabelState s;
    s.h = p.h;
    s.w = p.w;
    s.classes.resize(p.pixels());
    s.included.resize(p.pixels());
    s.weights.assign(p.pixels(), 0.0);
    for (size_t u = 0; u < p.pixels(); ++u) {
        double max_p;
        int argmax;
        find_max(p.p.data() + u * p.q, p.q, max_p, argmax);
        s.classes[u] = static_cast<uint8_t>(argmax);
        s.included[u] = max_p >= alpha ? 1 : 0;
    }
    return s;
}

std::vector<double> compute_weights(const ProbabilityMap& p, double alpha) {
    check(alpha > 0.0, "compute_weights: alpha must be in (0,1)");
    check(alpha < 1.0 - kAlphaGuard, "compute_weights: alpha too close to 1");
    std::vector<double> w(p.pixels(), 0.0);
    const double denom = 1.0 - alpha;
    for (size_t u = 0; u < p.pixels(); ++u) {
        double max_p;
        int argmax;
        find_max(p.p.data() + u * p.q, p.q, max_p, argmax);
        if (max_p >= alpha) w[u] = (max_p - alpha) / denom;
    }
    return w;
}

double weighted_ce(const ProbabilityMap& p, const PseudoLabelState& state,
                   LossNormalization norm) {
    check(state.h == p.h && state.w == p.w, "weighted_ce: state/probability shape mismatch");
    double acc = 0.0;
    size_t n_inc = 0;
    for (size_t u = 0; u < p.pixels(); ++u) {
        if (!state.included[u]) continue;
        ++n_inc;
        const double ph = std::max(p.p[u * p.q + state.classes[u]], kLogClamp);
        acc += state.weights[u] * (-std::log(ph));
    }
    if (norm == LossNormalization::mean) return n_inc ? acc / static_cast<double>(n_inc) : 0.0;
    return acc;
}

double balancing_loss(double alpha) {
    check(alpha > 0.0 && alpha < 1.0, "balancing_loss: alpha must be in (0,1)");
    const double l = std::log(1.0 - alpha);
    return l * l;
}

WplLossResult wpl_loss(const ProbabilityMap& p, const ThresholdParam& theta,
                       const WplLossConfig& cfg) {
    const double alpha = theta.alpha();
    check(alpha > 0.0 && alpha < 1.0 - kAlphaGuard, "wpl_loss: alpha out of range");
    check(cfg.sigma > 0.0 && cfg.gamma > 0.0, "wpl_loss: sigma and gamma must be positive");

    WplLossResult res;
    res.state = compute_pseudo_label(p, alpha);
    res.d_p.assign(p.p.size(), 0.0);

    const double denom = 1.0 - alpha;
    const size_t n_inc = res.state.included_count();
    const bool mean_norm = cfg.normalization == LossNormalization::mean;
    const double inv_n = mean_norm ? (n_inc ? 1.0 / static_cast<double>(n_inc) : 0.0) : 1.0;

    double l_w = 0.0;
    double dlw_dalpha = 0.0;
    for (size_t u = 0; u < p.pixels(); ++u) {
        const int cls = res.state.classes[u];
        const double max_p = p.p[u * p.q + cls];
        if (!std::isfinite(max_p))
            throw RuntimeFailure("wpl_loss: non-finite probability at pixel " +
                                 pixel_coords(p, u));
        if (!res.state.included[u]) continue;
        const double w_u = (max_p - alpha) / denom;
        res.state.weights[u] = w_u;
        const double ph = std::max(max_p, kLogClamp);
        const double nll = -std::log(ph);
        l_w += w_u * nll;
        // d w_u / d alpha with the confidence held constant.
        dlw_dalpha += (max_p - 1.0) / (denom * denom) * nll;
        if (max_p > kLogClamp)
            res.d_p[u * p.q + cls] = -cfg.sigma * inv_n * w_u / ph;
    }
    l_w *= inv_n;
    dlw_dalpha *= inv_n;

    const double log1a = std::log(denom);
    const double l_b = log1a * log1a;
    const double dlb_dalpha = -2.0 * log1a / denom;
    const double dalpha_dbeta = alpha * (1.0 - alpha);

    res.l_w = l_w;
    res.l_b = l_b;
    res.l_ss = cfg.sigma * l_w + cfg.gamma * l_b;
    res.d_beta = (cfg.sigma * dlw_dalpha + cfg.gamma * dlb_dalpha) * dalpha_dbeta;
    if (!std::isfinite(res.l_ss) || !std::isfinite(res.d_beta))
        throw RuntimeFailure("wpl_loss: non-finite loss (l_w=" + std::to_string(l_w) +
                             ", l_b=" + std::to_string(l_b) + ")");
    return res;
}

std::vector<PseudoLabelState> batchwise_pseudo_label(const std::vector<ProbabilityMap>& batch) {
    check(!batch.empty(), "batchwise_pseudo_label: batch must be non-empty");
    const int q = batch[0].q;
    for (const auto& p : batch)
        check(p.q == q, "batchwise_pseudo_label: class count differs within batch");

    // Collect per-class confidences over the whole batch.
    std::vector<std::vector<double>> conf_by_class(q);
    std::vector<std::vector<std::pair<double, int>>> argmaxes;  // (max confidence, class)
    argmaxes.reserve(batch.size());
    for (const auto& p : batch) {
        std::vector<std::pair<double, int>> am(p.pixels());
        for (size_t u = 0; u < p.pixels(); ++u) {
            double max_p;
            int cls;
            find_max(p.p.data() + u * q, q, max_p, cls);
            am[u] = {max_p, cls};
            conf_by_class[cls].push_back(max_p);
        }
        argmaxes.push_back(std::move(am));
    }

    std::vector<double> threshold(q, 0.0);
    std::vector<bool> has_pixels(q, false);
    for (int c = 0; c < q; ++c) {
        auto& v = conf_by_class[c];
        if (v.empty()) continue;  // class absent from the batch: nothing to include
        has_pixels[c] = true;
        std::sort(v.begin(), v.end());
        const size_t n = v.size();
        threshold[c] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    std::vector<PseudoLabelState> out;
    out.reserve(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        const auto& p = batch[i];
        PseudoLabelState s;
        s.h = p.h;
        s.w = p.w;
        s.classes.resize(p.pixels());
        s.included.resize(p.pixels());
        s.weights.assign(p.pixels(), 0.0);
        for (size_t u = 0; u < p.pixels(); ++u) {
            const auto& [max_p, cls] = argmaxes[i][u];
            s.classes[u] = static_cast<uint8_t>(cls);
            const bool inc = has_pixels[cls] && max_p > threshold[cls];
            s.included[u] = inc ? 1 : 0;
            if (inc) s.weights[u] = 1.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace rainshift::wpl

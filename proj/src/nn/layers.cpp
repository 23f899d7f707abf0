#include "rainshift/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>

#include "rainshift/core/check.hpp"

namespace rainshift::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

constexpr float kNormEps = 1e-5f;

int conv_out(int n, int k, int stride, int pad) { return (n + 2 * pad - k) / stride + 1; }

void im2col(const Tensor& x, int k, int stride, int pad, int oh, int ow, float* col) {
    const int K = x.c * k * k;
    const int N = oh * ow;
    for (int ci = 0; ci < x.c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                float* row = col + (static_cast<size_t>(ci) * k * k + ky * k + kx) * N;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        row[oy * ow + ox] =
                            (iy >= 0 && iy < x.h && ix >= 0 && ix < x.w) ? x.at(ci, iy, ix) : 0.f;
                    }
                }
            }
        }
    }
    (void)K;
}

void col2im(const float* dcol, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            Tensor& dx) {
    const int N = oh * ow;
    for (int ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const float* row = dcol + (static_cast<size_t>(ci) * k * k + ky * k + kx) * N;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= w) continue;
                        dx.at(ci, iy, ix) += row[oy * ow + ox];
                    }
                }
            }
        }
    }
}

Tensor he_init(int c, int h, int w, int fan_in, Rng& rng) {
    Tensor t(c, h, w);
    const float std = std::sqrt(2.f / static_cast<float>(fan_in));
    for (auto& v : t.data) v = std * static_cast<float>(rng.normal());
    return t;
}

struct ConvCache {
    AlignedVec col;
    int in_c, in_h, in_w, oh, ow;
};

struct NormCache {
    std::vector<float> xhat;
    std::vector<float> inv_std;  // per channel
    std::vector<float> scale;    // effective per-channel gamma
    int c, h, w;
};

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_c, int out_c, int k, int stride, int pad, Rng& rng)
    : in_c_(in_c),
      out_c_(out_c),
      k_(k),
      stride_(stride),
      pad_(pad),
      weight_(he_init(out_c, in_c * k * k, 1, in_c * k * k, rng)),
      bias_(Tensor(out_c, 1, 1)) {}

Tensor Conv2d::forward(const Tensor& x, Tape& tape) const {
    check(x.c == in_c_, "Conv2d: input channel mismatch");
    const int oh = conv_out(x.h, k_, stride_, pad_);
    const int ow = conv_out(x.w, k_, stride_, pad_);
    const int K = in_c_ * k_ * k_;
    const int N = oh * ow;

    ConvCache cache{AlignedVec(static_cast<size_t>(K) * N), x.c, x.h, x.w, oh, ow};
    im2col(x, k_, stride_, pad_, oh, ow, cache.col.data());

    Tensor y(out_c_, oh, ow);
    ConstMapMat W(weight_.value.data.data(), out_c_, K);
    ConstMapMat col(cache.col.data(), K, N);
    MapMat Y(y.data.data(), out_c_, N);
    Y.noalias() = W * col;
    for (int oc = 0; oc < out_c_; ++oc) Y.row(oc).array() += bias_.value.data[oc];

    tape.push(std::move(cache));
    return y;
}

Tensor Conv2d::backward(const Tensor& dy, Tape& tape) {
    ConvCache cache = tape.pop<ConvCache>();
    const int K = in_c_ * k_ * k_;
    const int N = cache.oh * cache.ow;

    ConstMapMat dY(dy.data.data(), out_c_, N);
    ConstMapMat col(cache.col.data(), K, N);
    MapMat dW(weight_.grad.data.data(), out_c_, K);
    dW.noalias() += dY * col.transpose();
    for (int oc = 0; oc < out_c_; ++oc) bias_.grad.data[oc] += dY.row(oc).sum();

    AlignedVec dcol(static_cast<size_t>(K) * N);
    MapMat dC(dcol.data(), K, N);
    ConstMapMat W(weight_.value.data.data(), out_c_, K);
    dC.noalias() = W.transpose() * dY;

    Tensor dx(cache.in_c, cache.in_h, cache.in_w);
    col2im(dcol.data(), cache.in_c, cache.in_h, cache.in_w, k_, stride_, pad_, cache.oh, cache.ow,
           dx);
    return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_n, int out_n, Rng& rng)
    : in_n_(in_n),
      out_n_(out_n),
      weight_(he_init(out_n, in_n, 1, in_n, rng)),
      bias_(Tensor(out_n, 1, 1)) {}

Tensor Linear::forward(const Tensor& x, Tape& tape) const {
    check(static_cast<int>(x.size()) == in_n_, "Linear: input size mismatch");
    Tensor y = Tensor::vec(out_n_);
    ConstMapMat W(weight_.value.data.data(), out_n_, in_n_);
    Eigen::Map<const Eigen::VectorXf> xv(x.data.data(), in_n_);
    Eigen::Map<Eigen::VectorXf> yv(y.data.data(), out_n_);
    yv.noalias() = W * xv;
    for (int i = 0; i < out_n_; ++i) yv[i] += bias_.value.data[i];
    tape.push(x);
    return y;
}

Tensor Linear::backward(const Tensor& dy, Tape& tape) {
    Tensor x = tape.pop<Tensor>();
    ConstMapMat W(weight_.value.data.data(), out_n_, in_n_);
    Eigen::Map<const Eigen::VectorXf> dyv(dy.data.data(), out_n_);
    Eigen::Map<const Eigen::VectorXf> xv(x.data.data(), in_n_);
    MapMat dW(weight_.grad.data.data(), out_n_, in_n_);
    dW.noalias() += dyv * xv.transpose();
    for (int i = 0; i < out_n_; ++i) bias_.grad.data[i] += dyv[i];

    Tensor dx(x.c, x.h, x.w);
    Eigen::Map<Eigen::VectorXf> dxv(dx.data.data(), in_n_);
    dxv.noalias() = W.transpose() * dyv;
    return dx;
}

// ---------------------------------------------------------------------------
// Instance normalization

namespace {

NormCache norm_forward(const Tensor& x, const float* scale, Tensor& y) {
    const int n = x.h * x.w;
    NormCache cache;
    cache.c = x.c;
    cache.h = x.h;
    cache.w = x.w;
    cache.xhat.resize(x.size());
    cache.inv_std.resize(x.c);
    cache.scale.assign(scale, scale + x.c);
    for (int ci = 0; ci < x.c; ++ci) {
        const float* xp = x.data.data() + static_cast<size_t>(ci) * n;
        float mean = 0.f;
        for (int i = 0; i < n; ++i) mean += xp[i];
        mean /= static_cast<float>(n);
        float var = 0.f;
        for (int i = 0; i < n; ++i) {
            const float d = xp[i] - mean;
            var += d * d;
        }
        var /= static_cast<float>(n);
        const float inv = 1.f / std::sqrt(var + kNormEps);
        cache.inv_std[ci] = inv;
        float* xh = cache.xhat.data() + static_cast<size_t>(ci) * n;
        for (int i = 0; i < n; ++i) xh[i] = (xp[i] - mean) * inv;
    }
    (void)y;
    return cache;
}

// Shared backward for plain and adaptive instance norm. Writes per-channel
// d_scale and d_shift, returns dx.
Tensor norm_backward(const Tensor& dy, const NormCache& cache, float* d_scale, float* d_shift) {
    const int n = cache.h * cache.w;
    Tensor dx(cache.c, cache.h, cache.w);
    for (int ci = 0; ci < cache.c; ++ci) {
        const float* dyp = dy.data.data() + static_cast<size_t>(ci) * n;
        const float* xh = cache.xhat.data() + static_cast<size_t>(ci) * n;
        float sum_dy = 0.f, sum_dy_xh = 0.f;
        for (int i = 0; i < n; ++i) {
            sum_dy += dyp[i];
            sum_dy_xh += dyp[i] * xh[i];
        }
        d_shift[ci] += sum_dy;
        d_scale[ci] += sum_dy_xh;
        const float g = cache.scale[ci];
        const float inv = cache.inv_std[ci];
        float* dxp = dx.data.data() + static_cast<size_t>(ci) * n;
        const float invn = 1.f / static_cast<float>(n);
        for (int i = 0; i < n; ++i) {
            dxp[i] = g * inv * (dyp[i] - invn * sum_dy - xh[i] * invn * sum_dy_xh);
        }
    }
    return dx;
}

}  // namespace

InstanceNorm2d::InstanceNorm2d(int channels)
    : channels_(channels), gamma_(Tensor(channels, 1, 1, 1.f)), beta_(Tensor(channels, 1, 1)) {}

Tensor InstanceNorm2d::forward(const Tensor& x, Tape& tape) const {
    check(x.c == channels_, "InstanceNorm2d: channel mismatch");
    Tensor y(x.c, x.h, x.w);
    NormCache cache = norm_forward(x, gamma_.value.data.data(), y);
    const int n = x.h * x.w;
    for (int ci = 0; ci < x.c; ++ci) {
        const float g = gamma_.value.data[ci];
        const float b = beta_.value.data[ci];
        const float* xh = cache.xhat.data() + static_cast<size_t>(ci) * n;
        float* yp = y.data.data() + static_cast<size_t>(ci) * n;
        for (int i = 0; i < n; ++i) yp[i] = g * xh[i] + b;
    }
    tape.push(std::move(cache));
    return y;
}

Tensor InstanceNorm2d::backward(const Tensor& dy, Tape& tape) {
    NormCache cache = tape.pop<NormCache>();
    return norm_backward(dy, cache, gamma_.grad.data.data(), beta_.grad.data.data());
}

Tensor AdaptiveInstanceNorm2d::forward(const Tensor& x, const Tensor& scale_shift,
                                       Tape& tape) const {
    check(x.c == channels_, "AdaIN: channel mismatch");
    check(static_cast<int>(scale_shift.size()) == 2 * channels_, "AdaIN: modulation size mismatch");
    Tensor y(x.c, x.h, x.w);
    NormCache cache = norm_forward(x, scale_shift.data.data(), y);
    const int n = x.h * x.w;
    for (int ci = 0; ci < x.c; ++ci) {
        const float s = scale_shift.data[ci];
        const float b = scale_shift.data[channels_ + ci];
        const float* xh = cache.xhat.data() + static_cast<size_t>(ci) * n;
        float* yp = y.data.data() + static_cast<size_t>(ci) * n;
        for (int i = 0; i < n; ++i) yp[i] = s * xh[i] + b;
    }
    tape.push(std::move(cache));
    return y;
}

Tensor AdaptiveInstanceNorm2d::backward(const Tensor& dy, Tape& tape, Tensor& dss) {
    NormCache cache = tape.pop<NormCache>();
    check(static_cast<int>(dss.size()) == 2 * channels_, "AdaIN backward: dss size mismatch");
    return norm_backward(dy, cache, dss.data.data(), dss.data.data() + channels_);
}

// ---------------------------------------------------------------------------
// Activations

Tensor LeakyRelu::forward(const Tensor& x, Tape& tape) const {
    Tensor y = x;
    for (auto& v : y.data) v = v > 0.f ? v : slope * v;
    tape.push(x);
    return y;
}

Tensor LeakyRelu::backward(const Tensor& dy, Tape& tape) const {
    Tensor x = tape.pop<Tensor>();
    Tensor dx(dy.c, dy.h, dy.w);
    for (size_t i = 0; i < dx.size(); ++i)
        dx.data[i] = x.data[i] > 0.f ? dy.data[i] : slope * dy.data[i];
    return dx;
}

Tensor Relu::forward(const Tensor& x, Tape& tape) const {
    Tensor y = x;
    for (auto& v : y.data) v = v > 0.f ? v : 0.f;
    tape.push(x);
    return y;
}

Tensor Relu::backward(const Tensor& dy, Tape& tape) const {
    Tensor x = tape.pop<Tensor>();
    Tensor dx(dy.c, dy.h, dy.w);
    for (size_t i = 0; i < dx.size(); ++i) dx.data[i] = x.data[i] > 0.f ? dy.data[i] : 0.f;
    return dx;
}

Tensor Tanh::forward(const Tensor& x, Tape& tape) const {
    Tensor y = x;
    for (auto& v : y.data) v = std::tanh(v);
    tape.push(y);
    return y;
}

Tensor Tanh::backward(const Tensor& dy, Tape& tape) const {
    Tensor y = tape.pop<Tensor>();
    Tensor dx(dy.c, dy.h, dy.w);
    for (size_t i = 0; i < dx.size(); ++i) dx.data[i] = dy.data[i] * (1.f - y.data[i] * y.data[i]);
    return dx;
}

// ---------------------------------------------------------------------------
// Spatial ops

Tensor Upsample2x::forward(const Tensor& x, Tape& tape) const {
    Tensor y(x.c, x.h * 2, x.w * 2);
    for (int ci = 0; ci < x.c; ++ci)
        for (int yy = 0; yy < y.h; ++yy)
            for (int xx = 0; xx < y.w; ++xx) y.at(ci, yy, xx) = x.at(ci, yy / 2, xx / 2);
    tape.push(std::pair<int, int>{x.h, x.w});
    return y;
}

Tensor Upsample2x::backward(const Tensor& dy, Tape& tape) const {
    auto [h, w] = tape.pop<std::pair<int, int>>();
    Tensor dx(dy.c, h, w);
    for (int ci = 0; ci < dy.c; ++ci)
        for (int yy = 0; yy < dy.h; ++yy)
            for (int xx = 0; xx < dy.w; ++xx) dx.at(ci, yy / 2, xx / 2) += dy.at(ci, yy, xx);
    return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, Tape& tape) const {
    Tensor y = Tensor::vec(x.c);
    const int n = x.h * x.w;
    for (int ci = 0; ci < x.c; ++ci) {
        float s = 0.f;
        const float* xp = x.data.data() + static_cast<size_t>(ci) * n;
        for (int i = 0; i < n; ++i) s += xp[i];
        y.data[ci] = s / static_cast<float>(n);
    }
    tape.push(std::pair<int, int>{x.h, x.w});
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy, Tape& tape) const {
    auto [h, w] = tape.pop<std::pair<int, int>>();
    Tensor dx(dy.c, h, w);
    const float invn = 1.f / static_cast<float>(h * w);
    for (int ci = 0; ci < dy.c; ++ci) {
        float* dxp = dx.data.data() + static_cast<size_t>(ci) * h * w;
        const float g = dy.data[ci] * invn;
        for (int i = 0; i < h * w; ++i) dxp[i] = g;
    }
    return dx;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    check(a.h == b.h && a.w == b.w, "concat_channels: spatial size mismatch");
    Tensor y(a.c + b.c, a.h, a.w);
    std::copy(a.data.begin(), a.data.end(), y.data.begin());
    std::copy(b.data.begin(), b.data.end(),
              y.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
    return y;
}

void split_channels(const Tensor& d, int c_a, Tensor& da, Tensor& db) {
    da = Tensor(c_a, d.h, d.w);
    db = Tensor(d.c - c_a, d.h, d.w);
    std::copy(d.data.begin(), d.data.begin() + da.data.size(), da.data.begin());
    std::copy(d.data.begin() + da.data.size(), d.data.end(), db.data.begin());
}

}  // namespace rainshift::nn

#include "rainshift/nn/optim.hpp"

#include <cmath>

#include "rainshift/core/check.hpp"

namespace rainshift::nn {

namespace {

std::vector<int> dims_of(const Tensor& t) { return {t.c, t.h, t.w}; }

std::vector<float> to_plain(const AlignedVec& v) { return {v.begin(), v.end()}; }

}  // namespace

SgdMomentum::SgdMomentum(std::vector<Param*> params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
    velocity_.reserve(params_.size());
    for (Param* p : params_) velocity_.emplace_back(p->value.c, p->value.h, p->value.w);
}

void SgdMomentum::step() {
    const float lr = static_cast<float>(lr_);
    const float m = static_cast<float>(momentum_);
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor& v = velocity_[i];
        Param& p = *params_[i];
        for (size_t j = 0; j < v.size(); ++j) {
            v.data[j] = m * v.data[j] + p.grad.data[j];
            p.value.data[j] -= lr * v.data[j];
        }
    }
}

void SgdMomentum::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void SgdMomentum::save_state(CheckpointBlob& blob, const std::string& prefix) const {
    for (size_t i = 0; i < velocity_.size(); ++i)
        blob.add(prefix + ".v" + std::to_string(i), dims_of(velocity_[i]), to_plain(velocity_[i].data));
}

void SgdMomentum::load_state(const CheckpointBlob& blob, const std::string& prefix) {
    for (size_t i = 0; i < velocity_.size(); ++i)
        {
        const auto& v = blob.get(prefix + ".v" + std::to_string(i), dims_of(velocity_[i]));
        velocity_[i].data.assign(v.begin(), v.end());
    }
}

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Param* p : params_) {
        m_.emplace_back(p->value.c, p->value.h, p->value.w);
        v_.emplace_back(p->value.c, p->value.h, p->value.w);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
    const float alpha = static_cast<float>(lr_ * std::sqrt(bc2) / bc1);
    const float eps = static_cast<float>(eps_ * std::sqrt(bc2));
    for (size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        for (size_t j = 0; j < p.value.size(); ++j) {
            const float g = p.grad.data[j];
            m_[i].data[j] = b1 * m_[i].data[j] + (1.f - b1) * g;
            v_[i].data[j] = b2 * v_[i].data[j] + (1.f - b2) * g * g;
            p.value.data[j] -= alpha * m_[i].data[j] / (std::sqrt(v_[i].data[j]) + eps);
        }
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void Adam::save_state(CheckpointBlob& blob, const std::string& prefix) const {
    for (size_t i = 0; i < m_.size(); ++i) {
        blob.add(prefix + ".m" + std::to_string(i), dims_of(m_[i]), to_plain(m_[i].data));
        blob.add(prefix + ".v" + std::to_string(i), dims_of(v_[i]), to_plain(v_[i].data));
    }
    blob.add(prefix + ".t", {1, 1, 1}, {static_cast<float>(t_)});
}

void Adam::load_state(const CheckpointBlob& blob, const std::string& prefix) {
    for (size_t i = 0; i < m_.size(); ++i) {
        const auto& m = blob.get(prefix + ".m" + std::to_string(i), dims_of(m_[i]));
        m_[i].data.assign(m.begin(), m.end());
        const auto& v = blob.get(prefix + ".v" + std::to_string(i), dims_of(v_[i]));
        v_[i].data.assign(v.begin(), v.end());
    }
    t_ = static_cast<long>(blob.get(prefix + ".t", {1, 1, 1})[0]);
}

void save_params(const std::vector<Param*>& params, CheckpointBlob& blob,
                 const std::string& prefix) {
    for (size_t i = 0; i < params.size(); ++i)
        blob.add(prefix + ".p" + std::to_string(i), dims_of(params[i]->value),
                 to_plain(params[i]->value.data));
}

void load_params(std::vector<Param*>& params, const CheckpointBlob& blob,
                 const std::string& prefix) {
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& v = blob.get(prefix + ".p" + std::to_string(i), dims_of(params[i]->value));
        params[i]->value.data.assign(v.begin(), v.end());
    }
}

}  // namespace rainshift::nn

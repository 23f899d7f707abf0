#pragma once

#include <any>
#include <utility>
#include <vector>

#include "rainshift/core/rng.hpp"
#include "rainshift/nn/tensor.hpp"

namespace rainshift::nn {

// Activation tape. Each forward pushes the layer's cache; each backward
// pops it, so backwards must run in strict reverse order of forwards. A
// network invoked several times in one step gets one tape per invocation.
class Tape {
  public:
    template <typename T>
    void push(T&& v) {
        stack_.emplace_back(std::forward<T>(v));
    }
    template <typename T>
    T pop() {
        T v = std::move(*std::any_cast<T>(&stack_.back()));
        stack_.pop_back();
        return v;
    }
    bool empty() const { return stack_.empty(); }

  private:
    std::vector<std::any> stack_;
};

class Conv2d {
  public:
    Conv2d(int in_c, int out_c, int k, int stride, int pad, Rng& rng);

    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape);

    void collect_params(std::vector<Param*>& out) {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }
    int out_channels() const { return out_c_; }

  private:
    int in_c_, out_c_, k_, stride_, pad_;
    Param weight_;  // (out_c, in_c*k*k, 1)
    Param bias_;    // (out_c, 1, 1)
};

class Linear {
  public:
    Linear(int in_n, int out_n, Rng& rng);

    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape);

    void collect_params(std::vector<Param*>& out) {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

  private:
    int in_n_, out_n_;
    Param weight_;  // (out_n, in_n, 1)
    Param bias_;    // (out_n, 1, 1)
};

// Per-channel normalization over the spatial extent, learned affine.
class InstanceNorm2d {
  public:
    explicit InstanceNorm2d(int channels);

    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape);

    void collect_params(std::vector<Param*>& out) {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }

  private:
    int channels_;
    Param gamma_, beta_;
};

// Instance normalization whose per-channel scale and shift arrive as an
// input vector of length 2*channels (scale first, then shift). Gradients
// flow to both the feature map and the modulation vector.
class AdaptiveInstanceNorm2d {
  public:
    explicit AdaptiveInstanceNorm2d(int channels) : channels_(channels) {}

    Tensor forward(const Tensor& x, const Tensor& scale_shift, Tape& tape) const;
    // Returns dx; accumulates d(scale_shift) into dss.
    Tensor backward(const Tensor& dy, Tape& tape, Tensor& dss);

    int channels() const { return channels_; }

  private:
    int channels_;
};

struct LeakyRelu {
    float slope;
    explicit LeakyRelu(float s = 0.2f) : slope(s) {}
    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape) const;
};

struct Relu {
    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape) const;
};

struct Tanh {
    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape) const;
};

struct Upsample2x {
    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape) const;
};

struct GlobalAvgPool {
    Tensor forward(const Tensor& x, Tape& tape) const;
    Tensor backward(const Tensor& dy, Tape& tape) const;
};

// Channel concatenation of two maps with equal spatial size.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& d, int c_a, Tensor& da, Tensor& db);

}  // namespace rainshift::nn

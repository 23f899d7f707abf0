#pragma once

#include <string>
#include <vector>

#include "rainshift/core/checkpoint.hpp"
#include "rainshift/nn/tensor.hpp"

namespace rainshift::nn {

// SGD with classical momentum: v = m*v + g; p -= lr*v.
class SgdMomentum {
  public:
    SgdMomentum(std::vector<Param*> params, double lr, double momentum);

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    void step();
    void zero_grad();

    void save_state(CheckpointBlob& blob, const std::string& prefix) const;
    void load_state(const CheckpointBlob& blob, const std::string& prefix);

  private:
    std::vector<Param*> params_;
    std::vector<Tensor> velocity_;
    double lr_, momentum_;
};

class Adam {
  public:
    Adam(std::vector<Param*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step();
    void zero_grad();

    void save_state(CheckpointBlob& blob, const std::string& prefix) const;
    void load_state(const CheckpointBlob& blob, const std::string& prefix);

  private:
    std::vector<Param*> params_;
    std::vector<Tensor> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

void save_params(const std::vector<Param*>& params, CheckpointBlob& blob,
                 const std::string& prefix);
void load_params(std::vector<Param*>& params, const CheckpointBlob& blob,
                 const std::string& prefix);

}  // namespace rainshift::nn

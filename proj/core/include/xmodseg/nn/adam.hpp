#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "xmodseg/nn/parameter.hpp"

namespace xmodseg::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over one parameter group. Moments live inside the parameters so a
// checkpoint of the parameters is a checkpoint of the optimizer too; only
// the step counter is held here.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {}

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T corr1 = T(1) - static_cast<T>(std::pow(cfg_.beta1, t_));
    const T corr2 = T(1) - static_cast<T>(std::pow(cfg_.beta2, t_));
    const T lr = static_cast<T>(cfg_.lr);
    const T eps = static_cast<T>(cfg_.eps);
    for (auto* p : params_) {
      if (!p->trainable) continue;
      auto& val = p->value.raw();
      auto& grad = p->grad.raw();
      auto& m = p->moment1.raw();
      auto& v = p->moment2.raw();
      for (size_t i = 0; i < val.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * grad[i];
        v[i] = b2 * v[i] + (T(1) - b2) * grad[i] * grad[i];
        const T mhat = m[i] / corr1;
        const T vhat = v[i] / corr2;
        val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  std::int64_t step_count() const { return t_; }
  void set_step_count(std::int64_t t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  std::vector<Parameter<T>*> params_;
  AdamConfig cfg_;
  std::int64_t t_ = 0;
};

}  // namespace xmodseg::nn

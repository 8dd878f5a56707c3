#pragma once

#include <string>

#include "xmodseg/nn/tensor.hpp"

namespace xmodseg::nn {

// A named trainable tensor plus its gradient accumulator and Adam moments.
// Non-trainable parameters (batch-norm running statistics) ride along so
// checkpoints capture the full model state.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> moment1;
  Tensor<T> moment2;
  bool trainable = true;

  explicit Parameter(std::string param_name, Tensor<T> init, bool is_trainable = true)
      : name(std::move(param_name)),
        value(std::move(init)),
        grad(Tensor<T>::zeros_like(value)),
        moment1(Tensor<T>::zeros_like(value)),
        moment2(Tensor<T>::zeros_like(value)),
        trainable(is_trainable) {}

  void zero_grad() { std::fill(grad.raw().begin(), grad.raw().end(), T{}); }
};

}  // namespace xmodseg::nn

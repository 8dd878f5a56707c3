#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "xmodseg/core/error.hpp"

namespace xmodseg::nn {

// Dense contiguous row-major tensor. Network activations are NCHW; loss
// values are shape {1}.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape, T fill = T{})
      : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  static Tensor from_vector(std::vector<std::int64_t> shape, std::vector<T> values) {
    Tensor t;
    t.shape_ = std::move(shape);
    check(checked_numel(t.shape_) == static_cast<std::int64_t>(values.size()),
          "Tensor: value count does not match shape");
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool defined() const { return !shape_.empty(); }

  std::int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int ndim() const { return static_cast<int>(shape_.size()); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  T item() const {
    check(numel() == 1, "Tensor::item: not a scalar");
    return data_[0];
  }

  // NCHW accessor.
  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out = Tensor<U>(shape_);
    for (std::int64_t i = 0; i < numel(); ++i) {
      out.raw()[static_cast<size_t>(i)] = static_cast<U>(data_[static_cast<size_t>(i)]);
    }
    return out;
  }

  static std::string shape_str(const std::vector<std::int64_t>& s) {
    std::string out = "(";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(s[i]);
    }
    return out + ")";
  }

 private:
  static std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (const auto d : shape) {
      check(d >= 0, "Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  std::vector<std::int64_t> shape_;
  std::vector<T> data_;
};

}  // namespace xmodseg::nn

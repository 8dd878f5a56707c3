#pragma once

#include <cstdint>
#include <vector>

#include "xmodseg/core/error.hpp"

namespace xmodseg {

// Dense row-major 2D grid. Image2d carries real intensities, Mask2d a
// binary labeling (0 background, 1 foreground).
template <typename T>
class Grid2d {
 public:
  Grid2d() = default;
  Grid2d(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    check(rows >= 0 && cols >= 0, "Grid2d: negative extent");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t size() const { return static_cast<std::int64_t>(rows_) * cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  template <typename U>
  bool same_shape(const Grid2d<U>& o) const {
    return rows_ == o.rows() && cols_ == o.cols();
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Image2d = Grid2d<double>;
using Mask2d = Grid2d<std::uint8_t>;

// Physical pixel extent in millimetres.
struct Spacing {
  double row_mm = 1.0;
  double col_mm = 1.0;
};

std::int64_t mask_area(const Mask2d& mask);

// Foreground volume in cc given in-plane spacing and slice thickness.
double mask_volume_cc(const Mask2d& mask, const Spacing& spacing, double thickness_mm);

}  // namespace xmodseg

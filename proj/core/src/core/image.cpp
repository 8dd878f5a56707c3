#include "xmodseg/core/image.hpp"

namespace xmodseg {

std::int64_t mask_area(const Mask2d& mask) {
  std::int64_t n = 0;
  for (const auto v : mask.raw()) n += (v != 0);
  return n;
}

double mask_volume_cc(const Mask2d& mask, const Spacing& spacing, double thickness_mm) {
  check(spacing.row_mm > 0 && spacing.col_mm > 0, "mask_volume_cc: spacing must be positive");
  check(thickness_mm > 0, "mask_volume_cc: thickness must be positive");
  const double voxel_mm3 = spacing.row_mm * spacing.col_mm * thickness_mm;
  return static_cast<double>(mask_area(mask)) * voxel_mm3 / 1000.0;
}

}  // namespace xmodseg

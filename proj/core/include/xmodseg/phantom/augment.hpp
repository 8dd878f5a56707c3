#pragma once

#include "xmodseg/phantom/dataset.hpp"

namespace xmodseg::phantom {

// Rotation about the image center (degrees, counter-clockwise in row/col
// space) combined with axis stretches. Image resamples bilinearly, mask by
// nearest neighbor so it stays binary; spacing divides by the stretch so
// physical size is preserved.
struct AugmentOp {
  double rotate_deg = 0.0;
  double stretch_row = 1.0;  // in (0.5, 2.0)
  double stretch_col = 1.0;
};

Sample augment(const Sample& sample, const AugmentOp& op);

}  // namespace xmodseg::phantom

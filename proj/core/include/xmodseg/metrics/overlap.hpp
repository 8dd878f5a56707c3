#pragma once

#include <cstdint>

#include "xmodseg/core/image.hpp"

namespace xmodseg::metrics {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

ConfusionCounts confusion(const Mask2d& pred, const Mask2d& gt);

// Dice similarity coefficient 2TP / (FP + 2TP + FN). Both masks empty is
// defined as 1.0, exactly one empty as 0.0.
double dsc(const Mask2d& pred, const Mask2d& gt);
double dsc_from_counts(const ConfusionCounts& c);

// Relative volume difference |v_alg - v_gt| / v_gt; v_gt must be positive.
double volume_ratio(double v_alg_cc, double v_gt_cc);

}  // namespace xmodseg::metrics

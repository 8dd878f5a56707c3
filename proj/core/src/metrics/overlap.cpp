#include "xmodseg/metrics/overlap.hpp"

#include <cmath>

#include "xmodseg/core/error.hpp"

namespace xmodseg::metrics {

ConfusionCounts confusion(const Mask2d& pred, const Mask2d& gt) {
  check(pred.same_shape(gt), "confusion: mask shape mismatch");
  ConfusionCounts c;
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.raw()[i] != 0;
    const bool t = gt.raw()[i] != 0;
    c.tp += (p && t);
    c.fp += (p && !t);
    c.fn += (!p && t);
  }
  return c;
}

double dsc_from_counts(const ConfusionCounts& c) {
  const std::int64_t denom = c.fp + 2 * c.tp + c.fn;
  if (denom == 0) return 1.0;  // both masks empty
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double dsc(const Mask2d& pred, const Mask2d& gt) {
  return dsc_from_counts(confusion(pred, gt));
}

double volume_ratio(double v_alg_cc, double v_gt_cc) {
  check(v_gt_cc > 0, "volume_ratio: reference volume must be positive");
  return std::abs(v_alg_cc - v_gt_cc) / v_gt_cc;
}

}  // namespace xmodseg::metrics

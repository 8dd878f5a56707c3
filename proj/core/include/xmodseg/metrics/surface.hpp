#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "xmodseg/core/image.hpp"

namespace xmodseg::metrics {

// Boundary pixels under 4-connectivity (foreground with a background
// 4-neighbor or touching the image frame), as physical (row_mm, col_mm)
// coordinates of the pixel centers.
std::vector<std::pair<double, double>> boundary_points_mm(const Mask2d& mask,
                                                          const Spacing& spacing);

// 95th percentile of the pooled directed surface distances
// {d(p, S_t)} u {d(t, S_p)} in millimetres, computed with an exact
// anisotropic Euclidean distance transform. Returns nullopt when either
// mask is empty (undefined distance; reported separately, never averaged).
std::optional<double> hd95(const Mask2d& pred, const Mask2d& gt, const Spacing& spacing);

// Same pooled multiset at an arbitrary percentile (100 = classic Hausdorff).
std::optional<double> hausdorff_percentile(const Mask2d& pred, const Mask2d& gt,
                                           const Spacing& spacing, double pct);

}  // namespace xmodseg::metrics

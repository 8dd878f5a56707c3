#include "xmodseg/metrics/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xmodseg/core/error.hpp"
#include "xmodseg/core/stats.hpp"

namespace xmodseg::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_boundary(const Mask2d& m, int r, int c) {
  if (!m(r, c)) return false;
  if (r == 0 || r == m.rows() - 1 || c == 0 || c == m.cols() - 1) return true;
  return !m(r - 1, c) || !m(r + 1, c) || !m(r, c - 1) || !m(r, c + 1);
}

// Felzenszwalb-Huttenlocher 1D squared distance transform with physical
// sample spacing w: d[i] = min_j f[j] + (w (i - j))^2.
void dt1d(const std::vector<double>& f, double w, std::vector<double>& d,
          std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  const auto x = [w](int i) { return w * static_cast<double>(i); };
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (true) {
      if (f[v[k]] == kInf) {
        // Seedless parabola never wins; drop it.
        if (k == 0) {
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      const double s = ((f[q] + x(q) * x(q)) - (f[v[k]] + x(v[k]) * x(v[k]))) /
                       (2.0 * x(q) - 2.0 * x(v[k]));
      if (s <= z[k]) {
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  if (f[v[0]] == kInf) {
    std::fill(d.begin(), d.begin() + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < x(q)) ++k;
    const double dx = x(q) - x(v[k]);
    d[q] = dx * dx + f[v[k]];
  }
}

// Exact squared EDT of a seed set on the pixel grid, anisotropic spacing.
Image2d squared_edt(const std::vector<std::pair<int, int>>& seeds, int rows, int cols,
                    const Spacing& spacing) {
  Image2d dist(rows, cols, kInf);
  for (const auto& [r, c] : seeds) dist(r, c) = 0.0;

  const int n = std::max(rows, cols);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  // Columns first (row spacing), then rows (col spacing).
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) f[r] = dist(r, c);
    f.resize(rows);
    dt1d(f, spacing.row_mm, d, v, z);
    for (int r = 0; r < rows; ++r) dist(r, c) = d[r];
    f.resize(n);
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) f[c] = dist(r, c);
    f.resize(cols);
    dt1d(f, spacing.col_mm, d, v, z);
    for (int c = 0; c < cols; ++c) dist(r, c) = d[c];
    f.resize(n);
  }
  return dist;
}

std::vector<std::pair<int, int>> boundary_pixels(const Mask2d& m) {
  std::vector<std::pair<int, int>> pts;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (is_boundary(m, r, c)) pts.emplace_back(r, c);
    }
  }
  return pts;
}

}  // namespace

std::vector<std::pair<double, double>> boundary_points_mm(const Mask2d& mask,
                                                          const Spacing& spacing) {
  check(spacing.row_mm > 0 && spacing.col_mm > 0, "boundary: spacing must be positive");
  std::vector<std::pair<double, double>> out;
  for (const auto& [r, c] : boundary_pixels(mask)) {
    out.emplace_back(r * spacing.row_mm, c * spacing.col_mm);
  }
  return out;
}

std::optional<double> hausdorff_percentile(const Mask2d& pred, const Mask2d& gt,
                                           const Spacing& spacing, double pct) {
  check(pred.same_shape(gt), "hd95: mask shape mismatch");
  check(spacing.row_mm > 0 && spacing.col_mm > 0, "hd95: spacing must be positive");
  const auto sp = boundary_pixels(pred);
  const auto st = boundary_pixels(gt);
  if (sp.empty() || st.empty()) return std::nullopt;

  const auto edt_t = squared_edt(st, pred.rows(), pred.cols(), spacing);
  const auto edt_p = squared_edt(sp, pred.rows(), pred.cols(), spacing);

  std::vector<double> pooled;
  pooled.reserve(sp.size() + st.size());
  for (const auto& [r, c] : sp) pooled.push_back(std::sqrt(edt_t(r, c)));
  for (const auto& [r, c] : st) pooled.push_back(std::sqrt(edt_p(r, c)));
  return percentile(std::move(pooled), pct);
}

std::optional<double> hd95(const Mask2d& pred, const Mask2d& gt, const Spacing& spacing) {
  return hausdorff_percentile(pred, gt, spacing, 95.0);
}

}  // namespace xmodseg::metrics

#include "xmodseg/phantom/augment.hpp"

#include <algorithm>
#include <cmath>

#include "xmodseg/core/error.hpp"

namespace xmodseg::phantom {

namespace {

struct InverseMap {
  double cy, cx, cos_t, sin_t, inv_sy, inv_sx;

  // Output pixel -> source coordinates (inverse stretch then inverse rotate).
  std::pair<double, double> operator()(int r, int c) const {
    const double y = (static_cast<double>(r) - cy) * inv_sy;
    const double x = (static_cast<double>(c) - cx) * inv_sx;
    const double sy_ = cos_t * y + sin_t * x;
    const double sx_ = -sin_t * y + cos_t * x;
    return {cy + sy_, cx + sx_};
  }
};

double bilinear(const Image2d& img, double r, double c) {
  const double rc = std::clamp(r, 0.0, static_cast<double>(img.rows() - 1));
  const double cc = std::clamp(c, 0.0, static_cast<double>(img.cols() - 1));
  const int r0 = static_cast<int>(std::floor(rc));
  const int c0 = static_cast<int>(std::floor(cc));
  const int r1 = std::min(r0 + 1, img.rows() - 1);
  const int c1 = std::min(c0 + 1, img.cols() - 1);
  const double fr = rc - r0;
  const double fc = cc - c0;
  return (1 - fr) * ((1 - fc) * img(r0, c0) + fc * img(r0, c1)) +
         fr * ((1 - fc) * img(r1, c0) + fc * img(r1, c1));
}

std::uint8_t nearest(const Mask2d& mask, double r, double c) {
  const int rn = static_cast<int>(std::lround(r));
  const int cn = static_cast<int>(std::lround(c));
  if (rn < 0 || rn >= mask.rows() || cn < 0 || cn >= mask.cols()) return 0;
  return mask(rn, cn);
}

}  // namespace

Sample augment(const Sample& sample, const AugmentOp& op) {
  check(op.stretch_row > 0.5 && op.stretch_row < 2.0 && op.stretch_col > 0.5 &&
            op.stretch_col < 2.0,
        "augment: stretch factors must lie in (0.5, 2.0)");
  const double theta = op.rotate_deg * M_PI / 180.0;
  const InverseMap inv{(sample.image.rows() - 1) / 2.0,
                       (sample.image.cols() - 1) / 2.0,
                       std::cos(theta),
                       std::sin(theta),
                       1.0 / op.stretch_row,
                       1.0 / op.stretch_col};

  Sample out;
  out.id = sample.id;
  out.subject_id = sample.subject_id;
  out.timepoint = sample.timepoint;
  out.domain = sample.domain;
  out.spacing = {sample.spacing.row_mm / op.stretch_row,
                 sample.spacing.col_mm / op.stretch_col};
  out.image = Image2d(sample.image.rows(), sample.image.cols());
  for (int r = 0; r < out.image.rows(); ++r) {
    for (int c = 0; c < out.image.cols(); ++c) {
      const auto [sr, sc] = inv(r, c);
      out.image(r, c) = bilinear(sample.image, sr, sc);
    }
  }
  if (sample.mask) {
    Mask2d m(sample.mask->rows(), sample.mask->cols());
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        const auto [sr, sc] = inv(r, c);
        m(r, c) = nearest(*sample.mask, sr, sc);
      }
    }
    out.mask = std::move(m);
  }
  return out;
}

}  // namespace xmodseg::phantom

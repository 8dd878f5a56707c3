#include "xmodseg/phantom/patches.hpp"

#include <algorithm>

#include "xmodseg/core/error.hpp"

namespace xmodseg::phantom {

namespace {

std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

template <typename T>
Grid2d<T> reflect_pad_grid(const Grid2d<T>& g, int top, int bottom, int left, int right) {
  check(top >= 0 && bottom >= 0 && left >= 0 && right >= 0, "reflect_pad: negative pad");
  check(top < g.rows() && bottom < g.rows() && left < g.cols() && right < g.cols(),
        "reflect_pad: pad exceeds image extent");
  Grid2d<T> out(g.rows() + top + bottom, g.cols() + left + right);
  for (int r = 0; r < out.rows(); ++r) {
    const auto ir = reflect_index(r - top, g.rows());
    for (int c = 0; c < out.cols(); ++c) {
      out(r, c) = g(static_cast<int>(ir), static_cast<int>(reflect_index(c - left, g.cols())));
    }
  }
  return out;
}

// Grid offsets: stride-size tiling plus a final window flush with the edge.
std::vector<int> tile_offsets(int extent, int size) {
  std::vector<int> offsets;
  for (int o = 0; o + size <= extent; o += size) offsets.push_back(o);
  if (offsets.empty() || offsets.back() + size < extent) {
    offsets.push_back(extent - size);
  }
  return offsets;
}

}  // namespace

Image2d reflect_pad_image(const Image2d& image, int top, int bottom, int left, int right) {
  return reflect_pad_grid(image, top, bottom, left, right);
}

Mask2d reflect_pad_mask(const Mask2d& mask, int top, int bottom, int left, int right) {
  return reflect_pad_grid(mask, top, bottom, left, right);
}

std::vector<Sample> extract_patches(const Sample& sample, int size, bool require_tumor) {
  check(size > 0, "extract_patches: size must be positive");
  Sample padded = sample;
  if (sample.image.rows() < size || sample.image.cols() < size) {
    const int pr = std::max(0, size - sample.image.rows());
    const int pc = std::max(0, size - sample.image.cols());
    const int top = pr / 2, bottom = pr - pr / 2;
    const int left = pc / 2, right = pc - pc / 2;
    padded.image = reflect_pad_image(sample.image, top, bottom, left, right);
    if (sample.mask) padded.mask = reflect_pad_mask(*sample.mask, top, bottom, left, right);
  }

  std::vector<Sample> patches;
  for (const int r0 : tile_offsets(padded.image.rows(), size)) {
    for (const int c0 : tile_offsets(padded.image.cols(), size)) {
      Sample p;
      p.id = sample.id + "_p" + std::to_string(r0) + "_" + std::to_string(c0);
      p.subject_id = sample.subject_id;
      p.timepoint = sample.timepoint;
      p.domain = sample.domain;
      p.spacing = sample.spacing;
      p.image = Image2d(size, size);
      for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) p.image(r, c) = padded.image(r0 + r, c0 + c);
      }
      if (padded.mask) {
        Mask2d m(size, size);
        for (int r = 0; r < size; ++r) {
          for (int c = 0; c < size; ++c) m(r, c) = (*padded.mask)(r0 + r, c0 + c);
        }
        p.mask = std::move(m);
      }
      if (require_tumor) {
        if (!p.mask || mask_area(*p.mask) == 0) continue;
      }
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

}  // namespace xmodseg::phantom

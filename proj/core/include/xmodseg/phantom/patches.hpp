#pragma once

#include <vector>

#include "xmodseg/phantom/dataset.hpp"

namespace xmodseg::phantom {

// Reflect padding (mirror without edge repeat) used both for undersized
// patch sources and for making inference sizes divisible.
Image2d reflect_pad_image(const Image2d& image, int top, int bottom, int left, int right);
Mask2d reflect_pad_mask(const Mask2d& mask, int top, int bottom, int left, int right);

// Tiles the sample into size x size patches on a stride-size grid with the
// trailing window shifted flush to the border; smaller inputs are
// reflect-padded up to size first. With require_tumor, only patches whose
// mask contains foreground are kept (empty-mask samples yield no patches).
std::vector<Sample> extract_patches(const Sample& sample, int size, bool require_tumor);

}  // namespace xmodseg::phantom

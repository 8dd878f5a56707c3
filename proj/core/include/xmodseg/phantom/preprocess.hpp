#pragma once

#include <vector>

#include "xmodseg/core/image.hpp"
#include "xmodseg/phantom/dataset.hpp"

namespace xmodseg::phantom {

// Intensity window clipped before mapping to [-1, 1].
struct ClipWindow {
  double lo;
  double hi;
};

ClipWindow clip_window(Domain domain);  // A: (-1000, 500), B: (0, 667)

// Clip to the domain window, then map linearly onto [-1, 1].
Image2d clip_and_normalize(const Image2d& image, Domain domain);

// Histogram-landmark standardization: reference percentile landmarks
// {p1, p10, p20, ..., p90, p99} averaged over a training set; application
// remaps each image's own landmarks onto the reference piecewise-linearly.
struct LandmarkModel {
  static const std::vector<double>& percentiles();  // length 11
  std::vector<double> reference_landmarks;          // strictly ascending, length 11
};

std::vector<double> image_landmarks(const Image2d& image);

LandmarkModel fit_landmarks(const std::vector<const Image2d*>& images);
Image2d apply_landmarks(const Image2d& image, const LandmarkModel& model);

// Full preprocessing for one sample: landmark standardization (domain B
// only, when a model is given) followed by clip-and-normalize. Samples
// already flagged preprocessed pass through unchanged.
Image2d preprocess_image(const Image2d& image, Domain domain,
                         const LandmarkModel* landmarks);

// Fits the landmark model on the domain-B training split of a dataset.
LandmarkModel fit_landmarks_on_train_b(const std::filesystem::path& dir,
                                       const DatasetManifest& manifest);

}  // namespace xmodseg::phantom

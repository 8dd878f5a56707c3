#include "xmodseg/phantom/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "xmodseg/core/error.hpp"

namespace xmodseg::phantom {

ClipWindow clip_window(Domain domain) {
  return domain == Domain::A ? ClipWindow{-1000.0, 500.0} : ClipWindow{0.0, 667.0};
}

Image2d clip_and_normalize(const Image2d& image, Domain domain) {
  const ClipWindow w = clip_window(domain);
  Image2d out(image.rows(), image.cols());
  const double scale = 2.0 / (w.hi - w.lo);
  for (std::int64_t i = 0; i < image.size(); ++i) {
    const double v = image.raw()[i];
    check(std::isfinite(v), "clip_and_normalize: non-finite intensity");
    const double clipped = std::min(w.hi, std::max(w.lo, v));
    out.raw()[i] = (clipped - w.lo) * scale - 1.0;
  }
  return out;
}

const std::vector<double>& LandmarkModel::percentiles() {
  static const std::vector<double> p = {1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 99};
  return p;
}

std::vector<double> image_landmarks(const Image2d& image) {
  check(image.size() > 0, "image_landmarks: empty image");
  std::vector<double> sorted(image.raw());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> lms;
  lms.reserve(LandmarkModel::percentiles().size());
  const auto n = sorted.size();
  for (const double p : LandmarkModel::percentiles()) {
    const double pos = p / 100.0 * static_cast<double>(n - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    lms.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  return lms;
}

LandmarkModel fit_landmarks(const std::vector<const Image2d*>& images) {
  check(!images.empty(), "fit_landmarks: need at least one training image");
  const size_t n_lm = LandmarkModel::percentiles().size();
  std::vector<double> acc(n_lm, 0.0);
  for (const auto* img : images) {
    const auto lms = image_landmarks(*img);
    check(lms.back() > lms.front(),
          "fit_landmarks: constant-valued image (all landmarks equal)");
    for (size_t i = 0; i < n_lm; ++i) acc[i] += lms[i];
  }
  LandmarkModel model;
  model.reference_landmarks.resize(n_lm);
  for (size_t i = 0; i < n_lm; ++i) {
    model.reference_landmarks[i] = acc[i] / static_cast<double>(images.size());
  }
  for (size_t i = 1; i < n_lm; ++i) {
    check(model.reference_landmarks[i] > model.reference_landmarks[i - 1],
          "fit_landmarks: reference landmarks not strictly ascending");
  }
  return model;
}

Image2d apply_landmarks(const Image2d& image, const LandmarkModel& model) {
  const auto& ref = model.reference_landmarks;
  check(ref.size() == LandmarkModel::percentiles().size(),
        "apply_landmarks: malformed model");
  for (size_t i = 1; i < ref.size(); ++i) {
    check(ref[i] > ref[i - 1], "apply_landmarks: model landmarks not ascending");
  }
  const auto own = image_landmarks(image);
  check(own.back() > own.front(),
        "apply_landmarks: constant-valued image (all landmarks equal)");

  // Collapse ties in the image's own landmarks so every segment has positive
  // width; the paired reference values are averaged over the tied group,
  // which keeps the map monotone non-decreasing.
  std::vector<double> xs, ys;
  size_t i = 0;
  while (i < own.size()) {
    size_t j = i;
    double ysum = 0.0;
    while (j < own.size() && own[j] == own[i]) {
      ysum += ref[j];
      ++j;
    }
    xs.push_back(own[i]);
    ys.push_back(ysum / static_cast<double>(j - i));
    i = j;
  }
  check(xs.size() >= 2, "apply_landmarks: degenerate landmark set");

  const auto map_value = [&](double v) {
    // Ends extend linearly with the boundary segment slope.
    size_t hi = 1;
    if (v > xs[xs.size() - 2]) {
      hi = xs.size() - 1;
    } else {
      while (xs[hi] < v) ++hi;
    }
    const size_t lo = hi - 1;
    const double slope = (ys[hi] - ys[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + slope * (v - xs[lo]);
  };

  Image2d out(image.rows(), image.cols());
  for (std::int64_t k = 0; k < image.size(); ++k) {
    out.raw()[k] = map_value(image.raw()[k]);
  }
  return out;
}

Image2d preprocess_image(const Image2d& image, Domain domain,
                         const LandmarkModel* landmarks) {
  if (domain == Domain::B && landmarks != nullptr) {
    return clip_and_normalize(apply_landmarks(image, *landmarks), domain);
  }
  return clip_and_normalize(image, domain);
}

LandmarkModel fit_landmarks_on_train_b(const std::filesystem::path& dir,
                                       const DatasetManifest& manifest) {
  const auto entries = manifest.select(Domain::B, Split::train);
  check(!entries.empty(), "fit_landmarks_on_train_b: no domain-B training samples");
  std::vector<Sample> samples = load_samples(dir, entries);
  std::vector<const Image2d*> images;
  images.reserve(samples.size());
  for (const auto& s : samples) images.push_back(&s.image);
  return fit_landmarks(images);
}

}  // namespace xmodseg::phantom

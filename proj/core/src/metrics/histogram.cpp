#include "xmodseg/metrics/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "xmodseg/core/error.hpp"

namespace xmodseg::metrics {

IntensityHistogram::IntensityHistogram(int n_bins, double lo, double hi)
    : lo_(lo), hi_(hi), counts_(static_cast<size_t>(n_bins), 0) {
  check(n_bins >= 1, "histogram: need at least one bin");
  check(hi > lo, "histogram: empty range");
}

void IntensityHistogram::add(double value) {
  const double t = (value - lo_) / (hi_ - lo_) * static_cast<double>(counts_.size());
  auto bin = static_cast<std::int64_t>(std::floor(t));
  bin = std::clamp<std::int64_t>(bin, 0, static_cast<std::int64_t>(counts_.size()) - 1);
  ++counts_[static_cast<size_t>(bin)];
  ++total_;
}

void IntensityHistogram::add_masked(const Image2d& image, const Mask2d& mask) {
  check(image.rows() == mask.rows() && image.cols() == mask.cols(),
        "histogram: image/mask shape mismatch");
  for (std::int64_t i = 0; i < image.size(); ++i) {
    if (mask.raw()[i]) add(image.raw()[i]);
  }
}

std::vector<double> IntensityHistogram::probabilities(double eps) const {
  check(eps > 0, "histogram: eps must be positive");
  check(total_ > 0, "histogram: no samples");
  std::vector<double> p(counts_.size());
  double sum = 0.0;
  for (size_t i = 0; i < counts_.size(); ++i) {
    p[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_) + eps;
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

bool IntensityHistogram::same_binning(const IntensityHistogram& other) const {
  return counts_.size() == other.counts_.size() && lo_ == other.lo_ && hi_ == other.hi_;
}

double kl_divergence(const IntensityHistogram& p, const IntensityHistogram& q,
                     double eps) {
  check(p.same_binning(q), "kl_divergence: histograms have different binning");
  const auto pp = p.probabilities(eps);
  const auto qq = q.probabilities(eps);
  double kl = 0.0;
  for (size_t i = 0; i < pp.size(); ++i) {
    kl += pp[i] * std::log(pp[i] / qq[i]);
  }
  return std::max(0.0, kl);  // clear numerical negative zero
}

IntensityHistogram tumor_histogram(const std::filesystem::path& dir,
                                   const phantom::DatasetManifest& manifest,
                                   int n_bins) {
  IntensityHistogram hist(n_bins);
  for (const auto& e : manifest.entries) {
    check(!e.mask_path.empty(), "tumor_histogram: sample without mask: " + e.id);
    const auto s = phantom::load_sample(dir, e);
    hist.add_masked(s.image, *s.mask);
  }
  check(hist.total() > 0, "tumor_histogram: dataset has no masked pixels");
  return hist;
}

IntensityHistogram tumor_histogram(const std::vector<const phantom::Sample*>& samples,
                                   int n_bins) {
  IntensityHistogram hist(n_bins);
  for (const auto* s : samples) {
    check(s->mask.has_value(), "tumor_histogram: sample without mask: " + s->id);
    hist.add_masked(s->image, *s->mask);
  }
  check(hist.total() > 0, "tumor_histogram: no masked pixels");
  return hist;
}

}  // namespace xmodseg::metrics

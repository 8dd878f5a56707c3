#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "xmodseg/phantom/dataset.hpp"

namespace xmodseg::metrics {

// Fixed-range intensity histogram over [-1, 1] (normalized intensities),
// 1000 bins by default. Values outside the range land in the edge bins.
class IntensityHistogram {
 public:
  explicit IntensityHistogram(int n_bins = 1000, double lo = -1.0, double hi = 1.0);

  void add(double value);
  void add_masked(const Image2d& image, const Mask2d& mask);

  int n_bins() const { return static_cast<int>(counts_.size()); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::int64_t total() const { return total_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  // Normalized probabilities after adding eps to every bin's probability
  // mass and renormalizing; sums to 1 within 1e-9.
  std::vector<double> probabilities(double eps = 1e-10) const;

  bool same_binning(const IntensityHistogram& other) const;

 private:
  double lo_, hi_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Kullback-Leibler divergence sum P ln(P/Q) over the smoothed histograms.
double kl_divergence(const IntensityHistogram& p, const IntensityHistogram& q,
                     double eps = 1e-10);

// Pooled histogram of intensities inside the tumor masks of every sample in
// the dataset. All samples must carry masks; at least one foreground pixel
// overall is required.
IntensityHistogram tumor_histogram(const std::filesystem::path& dir,
                                   const phantom::DatasetManifest& manifest,
                                   int n_bins = 1000);
IntensityHistogram tumor_histogram(const std::vector<const phantom::Sample*>& samples,
                                   int n_bins = 1000);

}  // namespace xmodseg::metrics

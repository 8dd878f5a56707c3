#include "xmodseg/core/stats.hpp"

#include <algorithm>
#include <cmath>

#include "xmodseg/core/error.hpp"

namespace xmodseg {

double percentile(std::vector<double> values, double p) {
  check(!values.empty(), "percentile: empty input");
  check(p >= 0.0 && p <= 100.0, "percentile: p out of range");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd r;
  r.n = static_cast<int>(values.size());
  if (r.n == 0) return r;
  double sum = 0.0;
  for (const double v : values) sum += v;
  r.mean = sum / r.n;
  if (r.n >= 2) {
    double ss = 0.0;
    for (const double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (r.n - 1));
  }
  return r;
}

double median(std::vector<double> values) {
  check(!values.empty(), "median: empty input");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace xmodseg

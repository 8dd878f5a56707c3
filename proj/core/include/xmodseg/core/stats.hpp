#pragma once

#include <vector>

namespace xmodseg {

// Quantile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 when n < 2
  int n = 0;
};

MeanSd mean_sd(const std::vector<double>& values);

double median(std::vector<double> values);  // even count: mean of middle two

}  // namespace xmodseg

#pragma once

#include <string>
#include <vector>

namespace xmodseg::metrics {

enum class SeriesSource { algorithm, expert };

// Tumor volume over time for one subject; times in weeks, strictly
// increasing, volumes in cc.
struct LongitudinalSeries {
  std::string subject_id;
  SeriesSource source = SeriesSource::algorithm;
  std::vector<double> weeks;
  std::vector<double> volumes_cc;
};

// Theil-Sen growth estimate: median over all pairs i < k of
// (v_k - v_i) / (t_k - t_i), in cc/week. Requires >= 2 points and distinct
// times; even pair counts use the mean of the two middle slopes.
double theil_sen_growth(const LongitudinalSeries& series);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
};

// Paired two-sided Student's t-test on per-subject slope differences.
// Zero-variance differences degenerate to p = 1 (all zero) or p = 0
// (constant nonzero shift, reported as < 1e-12).
TTestResult growth_rate_ttest(const std::vector<double>& slopes_alg,
                              const std::vector<double>& slopes_expert);

}  // namespace xmodseg::metrics

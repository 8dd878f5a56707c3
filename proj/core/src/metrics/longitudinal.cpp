#include "xmodseg/metrics/longitudinal.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

#include "xmodseg/core/error.hpp"
#include "xmodseg/core/stats.hpp"

namespace xmodseg::metrics {

double theil_sen_growth(const LongitudinalSeries& series) {
  const auto& t = series.weeks;
  const auto& v = series.volumes_cc;
  check(t.size() == v.size(), "theil_sen: time/volume length mismatch");
  check(t.size() >= 2, "theil_sen: need at least two timepoints");
  for (size_t i = 1; i < t.size(); ++i) {
    check(t[i] > t[i - 1], "theil_sen: times must be strictly increasing");
  }
  std::vector<double> slopes;
  slopes.reserve(t.size() * (t.size() - 1) / 2);
  for (size_t i = 0; i < t.size(); ++i) {
    for (size_t k = i + 1; k < t.size(); ++k) {
      slopes.push_back((v[k] - v[i]) / (t[k] - t[i]));
    }
  }
  return median(std::move(slopes));
}

TTestResult growth_rate_ttest(const std::vector<double>& slopes_alg,
                              const std::vector<double>& slopes_expert) {
  check(slopes_alg.size() == slopes_expert.size(),
        "growth_rate_ttest: paired test needs equal-length slope lists");
  const int n = static_cast<int>(slopes_alg.size());
  check(n >= 2, "growth_rate_ttest: need at least two paired subjects");

  std::vector<double> diff(slopes_alg.size());
  for (size_t i = 0; i < diff.size(); ++i) diff[i] = slopes_alg[i] - slopes_expert[i];
  const MeanSd d = mean_sd(diff);

  TTestResult result;
  if (d.sd == 0.0) {
    // Degenerate: zero variance. Identical lists give t = 0, p = 1; a
    // uniform nonzero shift is infinitely significant.
    if (d.mean == 0.0) {
      result.t = 0.0;
      result.p = 1.0;
    } else {
      result.t = d.mean > 0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
    }
    return result;
  }

  result.t = d.mean / (d.sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  result.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t)));
  return result;
}

}  // namespace xmodseg::metrics

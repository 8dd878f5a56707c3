#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "xmodseg/core/csv.hpp"
#include "xmodseg/core/stats.hpp"

namespace xmodseg::metrics {

struct SampleMetrics {
  std::string id;
  std::string subject_id;
  int timepoint = -1;
  double dsc = 0.0;
  std::optional<double> hd95_mm;  // undefined for empty masks
  double vr = 0.0;
  double volume_pred_cc = 0.0;
  double volume_gt_cc = 0.0;
};

struct MetricAggregates {
  MeanSd dsc;
  MeanSd hd95_mm;  // over defined values only
  MeanSd vr;
  int hd95_undefined = 0;
};

// Per-sample and aggregate segmentation accuracy for one trained model.
struct EvalReport {
  std::string regime;
  std::string architecture;
  std::string config_hash;
  std::string checkpoint_hash;
  std::vector<SampleMetrics> samples;
  MetricAggregates aggregates;
};

MetricAggregates aggregate(const std::vector<SampleMetrics>& samples);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

CsvTable to_csv(const std::vector<SampleMetrics>& samples);

// "0.75 +/- 0.12" presentation used across reports.
std::string format_mean_sd(const MeanSd& ms);

}  // namespace xmodseg::metrics

#include "xmodseg/metrics/report.hpp"

#include <cmath>
#include <cstdio>

namespace xmodseg::metrics {

using nlohmann::json;

MetricAggregates aggregate(const std::vector<SampleMetrics>& samples) {
  std::vector<double> dscs, hds, vrs;
  MetricAggregates agg;
  for (const auto& s : samples) {
    dscs.push_back(s.dsc);
    vrs.push_back(s.vr);
    if (s.hd95_mm) {
      hds.push_back(*s.hd95_mm);
    } else {
      ++agg.hd95_undefined;
    }
  }
  agg.dsc = mean_sd(dscs);
  agg.hd95_mm = mean_sd(hds);
  agg.vr = mean_sd(vrs);
  return agg;
}

namespace {

json mean_sd_to_json(const MeanSd& ms) {
  return json{{"mean", ms.mean}, {"sd", ms.sd}, {"n", ms.n}};
}

MeanSd mean_sd_from_json(const json& j) {
  return MeanSd{j.at("mean").get<double>(), j.at("sd").get<double>(),
                j.at("n").get<int>()};
}

}  // namespace

json to_json(const EvalReport& report) {
  json j;
  j["regime"] = report.regime;
  j["architecture"] = report.architecture;
  j["config_hash"] = report.config_hash;
  j["checkpoint_hash"] = report.checkpoint_hash;
  json samples = json::array();
  for (const auto& s : report.samples) {
    json sj;
    sj["id"] = s.id;
    sj["subject_id"] = s.subject_id;
    if (s.timepoint >= 0) sj["timepoint"] = s.timepoint;
    sj["dsc"] = s.dsc;
    if (s.hd95_mm) {
      sj["hd95_mm"] = *s.hd95_mm;
    } else {
      sj["hd95_mm"] = nullptr;
    }
    sj["vr"] = s.vr;
    sj["volume_pred_cc"] = s.volume_pred_cc;
    sj["volume_gt_cc"] = s.volume_gt_cc;
    samples.push_back(sj);
  }
  j["samples"] = samples;
  j["aggregates"] = {{"dsc", mean_sd_to_json(report.aggregates.dsc)},
                     {"hd95_mm", mean_sd_to_json(report.aggregates.hd95_mm)},
                     {"vr", mean_sd_to_json(report.aggregates.vr)},
                     {"hd95_undefined", report.aggregates.hd95_undefined}};
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  r.regime = j.at("regime").get<std::string>();
  r.architecture = j.at("architecture").get<std::string>();
  r.config_hash = j.value("config_hash", std::string());
  r.checkpoint_hash = j.value("checkpoint_hash", std::string());
  for (const auto& sj : j.at("samples")) {
    SampleMetrics s;
    s.id = sj.at("id").get<std::string>();
    s.subject_id = sj.at("subject_id").get<std::string>();
    s.timepoint = sj.value("timepoint", -1);
    s.dsc = sj.at("dsc").get<double>();
    if (!sj.at("hd95_mm").is_null()) s.hd95_mm = sj.at("hd95_mm").get<double>();
    s.vr = sj.at("vr").get<double>();
    s.volume_pred_cc = sj.at("volume_pred_cc").get<double>();
    s.volume_gt_cc = sj.at("volume_gt_cc").get<double>();
    r.samples.push_back(s);
  }
  const auto& aj = j.at("aggregates");
  r.aggregates.dsc = mean_sd_from_json(aj.at("dsc"));
  r.aggregates.hd95_mm = mean_sd_from_json(aj.at("hd95_mm"));
  r.aggregates.vr = mean_sd_from_json(aj.at("vr"));
  r.aggregates.hd95_undefined = aj.at("hd95_undefined").get<int>();
  return r;
}

CsvTable to_csv(const std::vector<SampleMetrics>& samples) {
  CsvTable t;
  t.header = {"id", "subject_id", "timepoint", "dsc", "hd95_mm",
              "vr", "volume_pred_cc", "volume_gt_cc"};
  for (const auto& s : samples) {
    t.rows.push_back({s.id, s.subject_id, std::to_string(s.timepoint),
                      format_double(s.dsc),
                      s.hd95_mm ? format_double(*s.hd95_mm) : "nan",
                      format_double(s.vr), format_double(s.volume_pred_cc),
                      format_double(s.volume_gt_cc)});
  }
  return t;
}

std::string format_mean_sd(const MeanSd& ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f +/- %.3f", ms.mean, ms.sd);
  return buf;
}

}  // namespace xmodseg::metrics

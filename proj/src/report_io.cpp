#include "handqc/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "handqc/error.hpp"

namespace handqc {

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : r.per_class) {
    classes.push_back({{"name", c.name},
                       {"gt_count", c.gt_count},
                       {"detection_count", c.detection_count},
                       {"zero_support", c.zero_support},
                       {"ap", c.ap},
                       {"ap_50_95", c.ap_50_95},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1}});
  }
  return {{"classes", r.classes},
          {"iou_thresholds", r.iou_thresholds},
          {"interpolation", "11-point"},
          {"per_class", classes},
          {"map", r.map},
          {"map_50", r.map_50},
          {"map_50_95", r.map_50_95},
          {"reference_confidence", r.reference_confidence},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"tp", r.true_positives},
          {"fp", r.false_positives},
          {"fn", r.false_negatives},
          {"tn", r.true_negatives},
          {"num_images", r.num_images},
          {"num_gt", r.num_gt},
          {"num_detections", r.num_detections}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    j.at("classes").get_to(r.classes);
    j.at("iou_thresholds").get_to(r.iou_thresholds);
    j.at("map").get_to(r.map);
    r.map_50 = j.at("map_50").get<double>();
    r.map_50_95 = j.at("map_50_95").get<double>();
    r.reference_confidence = j.value("reference_confidence", 0.25);
    r.precision = j.value("precision", 0.0);
    r.recall = j.value("recall", 0.0);
    r.f1 = j.value("f1", 0.0);
    r.true_positives = j.value("tp", 0);
    r.false_positives = j.value("fp", 0);
    r.false_negatives = j.value("fn", 0);
    r.num_images = j.value("num_images", 0);
    r.num_gt = j.value("num_gt", 0);
    r.num_detections = j.value("num_detections", 0);
    for (const auto& c : j.value("per_class", nlohmann::json::array())) {
      ClassReport cr;
      cr.name = c.at("name").get<std::string>();
      cr.gt_count = c.value("gt_count", 0);
      cr.detection_count = c.value("detection_count", 0);
      cr.zero_support = c.value("zero_support", false);
      cr.ap = c.value("ap", std::vector<double>{});
      cr.ap_50_95 = c.value("ap_50_95", 0.0);
      cr.precision = c.value("precision", 0.0);
      cr.recall = c.value("recall", 0.0);
      cr.f1 = c.value("f1", 0.0);
      r.per_class.push_back(std::move(cr));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid report JSON: ") + e.what());
  }
}

std::string format_metric(double value, int decimals) {
  // Rounds half away from zero at the requested precision and never prints "-0.000".
  const double scale = std::pow(10.0, decimals);
  double rounded = std::round(value * scale) / scale;
  if (rounded == 0.0) rounded = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

std::string report_csv(const EvalReport& r, const std::string& model_name) {
  std::string head = "model,precision,recall,f1,mAP@0.5,mAP@0.5:0.95";
  std::string row = model_name + "," + format_metric(r.precision) + "," + format_metric(r.recall) +
                    "," + format_metric(r.f1) + "," + format_metric(r.map_50) + "," +
                    format_metric(r.map_50_95);
  for (const auto& c : r.per_class) {
    head += ",mAP " + c.name;
    row += "," + (c.zero_support ? std::string("n/a") : format_metric(c.ap_50_95));
  }
  return head + "\n" + row + "\n";
}

std::string delta_csv(const std::vector<DeltaRow>& rows) {
  std::string out = "metric,baseline,other,dropped\n";
  for (const auto& d : rows) {
    out += d.metric + "," + format_metric(d.baseline) + "," + format_metric(d.other) + "," +
           format_metric(d.dropped) + "\n";
  }
  return out;
}

std::string delta_table(const std::vector<DeltaRow>& rows) {
  std::size_t width = 6;
  for (const auto& d : rows) width = std::max(width, d.metric.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %11s\n", static_cast<int>(width), "metric",
                "baseline", "other", "mAP dropped");
  out += buf;
  for (const auto& d : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %11s\n", static_cast<int>(width),
                  d.metric.c_str(), format_metric(d.baseline).c_str(),
                  format_metric(d.other).c_str(), format_metric(d.dropped).c_str());
    out += buf;
  }
  return out;
}

}  // namespace handqc

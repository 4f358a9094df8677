#include "handqc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "handqc/error.hpp"

namespace handqc {

bool BBox::is_valid() const noexcept {
  const auto finite = std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h);
  return finite && cx >= 0.0 && cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 &&
         h > 0.0 && h <= 1.0;
}

CornerBox BBox::corners() const noexcept {
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return {unit(cx - w / 2), unit(cy - h / 2), unit(cx + w / 2), unit(cy + h / 2)};
}

BBox BBox::from_corners(const CornerBox& c) noexcept {
  return {(c.x1 + c.x2) / 2, (c.y1 + c.y2) / 2, c.x2 - c.x1, c.y2 - c.y1};
}

IouResult iou_checked(const CornerBox& a, const CornerBox& b) noexcept {
  const double area_a = a.area(), area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0) return {0.0, true};
  const CornerBox inter{std::max(a.x1, b.x1), std::max(a.y1, b.y1), std::min(a.x2, b.x2),
                        std::min(a.y2, b.y2)};
  const double i = inter.area();
  return {i / (area_a + area_b - i), false};
}

int MatchOutcome::true_positives() const noexcept {
  return static_cast<int>(std::count(detection_flags.begin(), detection_flags.end(),
                                     MatchFlag::TruePositive));
}

int MatchOutcome::false_positives() const noexcept {
  return static_cast<int>(detection_flags.size()) - true_positives();
}

int MatchOutcome::false_negatives() const noexcept {
  return static_cast<int>(std::count(gt_matched.begin(), gt_matched.end(), false));
}

namespace {

std::vector<std::size_t> by_descending_confidence(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });
  return order;
}

}  // namespace

MatchOutcome match_detections(std::span<const Detection> dets, std::span<const GroundTruthBox> gts,
                              double threshold) {
  MatchOutcome out;
  out.threshold = threshold;
  out.detection_flags.assign(dets.size(), MatchFlag::FalsePositive);
  out.matched_gt.assign(dets.size(), -1);
  out.gt_matched.assign(gts.size(), false);

  for (const std::size_t d : by_descending_confidence(dets)) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (out.gt_matched[g] || gts[g].class_id != dets[d].class_id) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= threshold) {
      out.detection_flags[d] = MatchFlag::TruePositive;
      out.matched_gt[d] = best;
      out.gt_matched[static_cast<std::size_t>(best)] = true;
    }
  }
  return out;
}

PRCurve precision_recall_curve(std::span<const ScoredMatch> matches, int gt_count) {
  PRCurve curve;
  curve.gt_count = gt_count;
  if (gt_count <= 0) return curve;

  std::vector<ScoredMatch> sorted(matches.begin(), matches.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const ScoredMatch& a, const ScoredMatch& b) {
    return a.confidence > b.confidence;
  });
  curve.points.reserve(sorted.size());
  int tp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].true_positive) ++tp;
    curve.points.push_back({static_cast<double>(tp) / gt_count,
                            static_cast<double>(tp) / static_cast<double>(i + 1),
                            sorted[i].confidence});
  }
  return curve;
}

PRCurve precision_recall_curve(std::span<const ImageMatch> images, int class_id) {
  std::vector<ScoredMatch> matches;
  int gt_count = 0;
  for (const auto& img : images) {
    for (std::size_t d = 0; d < img.detections.size(); ++d) {
      if (img.detections[d].class_id != class_id) continue;
      const bool tp = img.outcome && img.outcome->detection_flags[d] == MatchFlag::TruePositive;
      matches.push_back({img.detections[d].confidence, tp});
    }
    gt_count += static_cast<int>(std::count_if(
        img.ground_truth.begin(), img.ground_truth.end(),
        [&](const GroundTruthBox& g) { return g.class_id == class_id; }));
  }
  return precision_recall_curve(matches, gt_count);
}

double ap11(const PRCurve& curve) {
  if (curve.points.empty()) return 0.0;
  // Suffix maximum of precision, so P_interp(r) is a lookup of the first point with recall >= r.
  std::vector<double> best(curve.points.size());
  double running = 0.0;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    best[i] = running;
  }
  double sum = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double r = k / 10.0;
    const auto it = std::find_if(curve.points.begin(), curve.points.end(),
                                 [r](const PRPoint& p) { return p.recall >= r; });
    if (it != curve.points.end()) sum += best[static_cast<std::size_t>(it - curve.points.begin())];
  }
  return sum / 11.0;
}

double f1(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

std::vector<double> EvalConfig::default_iou_thresholds() { return threshold_range(0.5, 0.95, 0.05); }

std::vector<double> EvalConfig::threshold_range(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) {
    throw ConfigError("IoU range needs lo <= hi and step > 0");
  }
  std::vector<double> out;
  // Index-based generation keeps 0.55, 0.6, ... free of accumulated drift.
  for (int i = 0;; ++i) {
    const double t = lo + i * step;
    if (t > hi + step * 1e-6) break;
    out.push_back(std::round(t * 1e12) / 1e12);
  }
  return out;
}

void EvalConfig::validate() const {
  if (num_classes < 1) throw ConfigError("class count must be positive");
  if (!class_names.empty() && static_cast<int>(class_names.size()) != num_classes) {
    throw ConfigError("got " + std::to_string(class_names.size()) + " class names for " +
                      std::to_string(num_classes) + " classes");
  }
  if (iou_thresholds.empty()) throw ConfigError("at least one IoU threshold is required");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("IoU thresholds must lie in (0, 1)");
    if (i > 0 && !(t > iou_thresholds[i - 1])) {
      throw ConfigError("IoU thresholds must be strictly increasing");
    }
  }
  if (!(reference_confidence >= 0.0 && reference_confidence <= 1.0)) {
    throw ConfigError("reference confidence must lie in [0, 1]");
  }
}

std::string EvalConfig::class_name(int id) const {
  if (!class_names.empty()) return class_names.at(static_cast<std::size_t>(id));
  return "class" + std::to_string(id);
}

namespace {

void validate_inputs(const ImageDetections& preds, const ImageGroundTruth& gts, int num_classes) {
  for (const auto& [key, boxes] : gts) {
    for (const auto& g : boxes) {
      if (g.class_id < 0 || g.class_id >= num_classes) {
        throw InvalidInputError(key + ": ground-truth class " + std::to_string(g.class_id) +
                                " of " + std::to_string(num_classes));
      }
    }
  }
  for (const auto& [key, dets] : preds) {
    if (!gts.contains(key)) throw InvalidInputError("predictions for unknown image '" + key + "'");
    for (const auto& d : dets) {
      if (d.class_id < 0 || d.class_id >= num_classes) {
        throw InvalidInputError(key + ": detection class " + std::to_string(d.class_id) + " of " +
                                std::to_string(num_classes));
      }
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        throw InvalidInputError(key + ": detection confidence outside [0, 1]");
      }
    }
  }
}

struct ThresholdPass {
  std::vector<MatchOutcome> outcomes;  // one per gt image, in key order
  std::vector<ImageMatch> images;
};

ThresholdPass match_all(const ImageDetections& preds, const ImageGroundTruth& gts, double t) {
  static const std::vector<Detection> kNone;
  ThresholdPass pass;
  pass.outcomes.reserve(gts.size());
  for (const auto& [key, boxes] : gts) {
    const auto it = preds.find(key);
    const auto& dets = it == preds.end() ? kNone : it->second;
    pass.outcomes.push_back(match_detections(dets, boxes, t));
  }
  std::size_t i = 0;
  for (const auto& [key, boxes] : gts) {
    const auto it = preds.find(key);
    const auto& dets = it == preds.end() ? kNone : it->second;
    pass.images.push_back({dets, boxes, &pass.outcomes[i++]});
  }
  return pass;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

EvalReport evaluate(const ImageDetections& preds, const ImageGroundTruth& gts, const EvalConfig& cfg) {
  cfg.validate();
  validate_inputs(preds, gts, cfg.num_classes);

  EvalReport report;
  report.iou_thresholds = cfg.iou_thresholds;
  report.reference_confidence = cfg.reference_confidence;
  report.num_images = static_cast<int>(gts.size());
  for (const auto& [key, boxes] : gts) report.num_gt += static_cast<int>(boxes.size());
  for (const auto& [key, dets] : preds) report.num_detections += static_cast<int>(dets.size());
  if (report.num_gt == 0) throw InvalidInputError("empty ground truth");

  const auto n_classes = static_cast<std::size_t>(cfg.num_classes);
  report.per_class.resize(n_classes);
  for (int c = 0; c < cfg.num_classes; ++c) {
    auto& cr = report.per_class[static_cast<std::size_t>(c)];
    cr.name = cfg.class_name(c);
    report.classes.push_back(cr.name);
  }

  auto map_at = [&](const ThresholdPass& pass, std::vector<double>* per_class_ap) {
    std::vector<double> supported;
    for (int c = 0; c < cfg.num_classes; ++c) {
      const PRCurve curve = precision_recall_curve(pass.images, c);
      const double ap = ap11(curve);
      if (per_class_ap) per_class_ap[static_cast<std::size_t>(c)].push_back(ap);
      if (!curve.zero_support()) supported.push_back(ap);
    }
    return mean_of(supported);
  };

  std::vector<std::vector<double>> class_ap(n_classes);
  for (const double t : cfg.iou_thresholds) {
    report.map.push_back(map_at(match_all(preds, gts, t), class_ap.data()));
  }
  report.map_50_95 = mean_of(report.map);

  // Headline P/R/F1 and mAP@0.5 come from a dedicated pass at IoU 0.5.
  const ThresholdPass at50 = match_all(preds, gts, 0.5);
  const auto it50 = std::find_if(cfg.iou_thresholds.begin(), cfg.iou_thresholds.end(),
                                 [](double t) { return std::abs(t - 0.5) < 1e-12; });
  report.map_50 = it50 != cfg.iou_thresholds.end()
                      ? report.map[static_cast<std::size_t>(it50 - cfg.iou_thresholds.begin())]
                      : map_at(at50, nullptr);

  std::vector<int> tp(n_classes, 0), fp(n_classes, 0), gt_count(n_classes, 0), det_count(n_classes, 0);
  for (const auto& img : at50.images) {
    for (std::size_t d = 0; d < img.detections.size(); ++d) {
      const auto c = static_cast<std::size_t>(img.detections[d].class_id);
      ++det_count[c];
      if (img.detections[d].confidence < cfg.reference_confidence) continue;
      if (img.outcome->detection_flags[d] == MatchFlag::TruePositive) {
        ++tp[c];
      } else {
        ++fp[c];
      }
    }
    for (const auto& g : img.ground_truth) ++gt_count[static_cast<std::size_t>(g.class_id)];
  }

  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& cr = report.per_class[c];
    cr.gt_count = gt_count[c];
    cr.detection_count = det_count[c];
    cr.zero_support = gt_count[c] == 0;
    cr.ap = std::move(class_ap[c]);
    cr.ap_50_95 = mean_of(cr.ap);
    cr.precision = tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
    cr.recall = gt_count[c] > 0 ? static_cast<double>(tp[c]) / gt_count[c] : 0.0;
    cr.f1 = f1(cr.precision, cr.recall);
    report.true_positives += tp[c];
    report.false_positives += fp[c];
  }
  report.false_negatives = report.num_gt - report.true_positives;
  const int called = report.true_positives + report.false_positives;
  report.precision = called > 0 ? static_cast<double>(report.true_positives) / called : 0.0;
  report.recall = static_cast<double>(report.true_positives) / report.num_gt;
  report.f1 = f1(report.precision, report.recall);
  return report;
}

std::vector<DeltaRow> compare_reports(const EvalReport& baseline, const EvalReport& other) {
  if (baseline.classes != other.classes) {
    throw IncomparableError("reports cover different class lists");
  }
  if (baseline.iou_thresholds.size() != other.iou_thresholds.size() ||
      !std::equal(baseline.iou_thresholds.begin(), baseline.iou_thresholds.end(),
                  other.iou_thresholds.begin(),
                  [](double a, double b) { return std::abs(a - b) < 1e-9; })) {
    throw IncomparableError("reports use different IoU thresholds");
  }

  std::vector<DeltaRow> rows;
  auto add = [&rows](std::string name, double a, double b) {
    rows.push_back({std::move(name), a, b, a - b});
  };
  add("mAP@0.5:0.95", baseline.map_50_95, other.map_50_95);
  add("mAP@0.5", baseline.map_50, other.map_50);
  for (std::size_t i = 0; i < baseline.iou_thresholds.size() && i < baseline.map.size() &&
                          i < other.map.size();
       ++i) {
    char label[32];
    std::snprintf(label, sizeof label, "mAP@%.2f", baseline.iou_thresholds[i]);
    add(label, baseline.map[i], other.map[i]);
  }
  for (std::size_t c = 0; c < baseline.per_class.size() && c < other.per_class.size(); ++c) {
    add("AP@0.5:0.95 " + baseline.per_class[c].name, baseline.per_class[c].ap_50_95,
        other.per_class[c].ap_50_95);
  }
  add("precision", baseline.precision, other.precision);
  add("recall", baseline.recall, other.recall);
  add("F1", baseline.f1, other.f1);
  return rows;
}

}  // namespace handqc

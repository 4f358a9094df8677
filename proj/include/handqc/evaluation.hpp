#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "handqc/geometry.hpp"

namespace handqc {

struct GroundTruthBox {
  int class_id = 0;
  BBox box;

  bool operator==(const GroundTruthBox&) const = default;
};

struct Detection {
  int class_id = 0;
  double confidence = 0.0;
  BBox box;

  bool operator==(const Detection&) const = default;
};

enum class MatchFlag { TruePositive, FalsePositive };

/// Result of matching one image's detections against its ground truth at one IoU threshold.
/// True negatives have no meaning for detection and are always reported as zero.
struct MatchOutcome {
  double threshold = 0.5;
  std::vector<MatchFlag> detection_flags;  // indexed like the input detections
  std::vector<int> matched_gt;             // per detection, -1 when unmatched
  std::vector<bool> gt_matched;            // false == false negative

  int true_positives() const noexcept;
  int false_positives() const noexcept;
  int false_negatives() const noexcept;
  static constexpr int true_negatives() noexcept { return 0; }
};

/// Greedy matching: detections in descending confidence (ties by input order) each claim the
/// still-unmatched same-class ground truth of highest IoU (ties to the lowest index) when that
/// IoU is at least `threshold`.
MatchOutcome match_detections(std::span<const Detection> dets, std::span<const GroundTruthBox> gts,
                              double threshold);

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double confidence = 0.0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // descending confidence
  int gt_count = 0;

  bool zero_support() const noexcept { return gt_count == 0; }
};

/// One detection of the swept class: its confidence and whether it was a true positive.
struct ScoredMatch {
  double confidence = 0.0;
  bool true_positive = false;
};

/// Cumulative precision/recall over detections sorted by descending confidence (stable).
/// A curve with `gt_count == 0` is returned empty and flagged as zero support.
PRCurve precision_recall_curve(std::span<const ScoredMatch> matches, int gt_count);

/// Dataset-level sweep for one class over per-image matching results.
struct ImageMatch {
  std::span<const Detection> detections;
  std::span<const GroundTruthBox> ground_truth;
  const MatchOutcome* outcome = nullptr;
};
PRCurve precision_recall_curve(std::span<const ImageMatch> images, int class_id);

/// 11-point interpolated average precision; empty curves give 0.
double ap11(const PRCurve& curve);

/// Harmonic mean of precision and recall, 0 when both are 0.
double f1(double precision, double recall) noexcept;

enum class Interpolation { ElevenPoint };

struct EvalConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  int num_classes = 5;
  std::vector<std::string> class_names;  // empty: "class<i>"
  double reference_confidence = 0.25;
  Interpolation interpolation = Interpolation::ElevenPoint;

  /// 0.50, 0.55, ..., 0.95.
  static std::vector<double> default_iou_thresholds();
  /// Thresholds lo, lo+step, ... up to hi inclusive (with a small tolerance on hi).
  static std::vector<double> threshold_range(double lo, double hi, double step);

  void validate() const;
  std::string class_name(int id) const;
};

struct ClassReport {
  std::string name;
  int gt_count = 0;
  int detection_count = 0;
  bool zero_support = false;
  std::vector<double> ap;  // one per IoU threshold
  double ap_50_95 = 0.0;   // mean over thresholds
  double precision = 0.0;  // at the reference confidence and IoU 0.5
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<double> iou_thresholds;
  std::vector<ClassReport> per_class;
  std::vector<double> map;  // one per IoU threshold
  double map_50 = 0.0;
  double map_50_95 = 0.0;   // mean of `map`
  double reference_confidence = 0.25;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  int true_negatives = 0;
  int num_images = 0;
  int num_gt = 0;
  int num_detections = 0;
};

using ImageDetections = std::map<std::string, std::vector<Detection>>;
using ImageGroundTruth = std::map<std::string, std::vector<GroundTruthBox>>;

/// Full metric stack. Per threshold every class with ground truth contributes its AP11 to the
/// mAP mean; classes without ground truth are reported with `zero_support` and excluded.
/// Throws InvalidInputError for an empty ground truth or predictions on unknown images.
EvalReport evaluate(const ImageDetections& preds, const ImageGroundTruth& gts,
                    const EvalConfig& cfg = {});

struct DeltaRow {
  std::string metric;
  double baseline = 0.0;
  double other = 0.0;
  double dropped = 0.0;  // baseline - other
};

/// Signed differences baseline - other for every headline metric, per-threshold mAP and
/// per-class AP. Throws IncomparableError when classes or thresholds differ.
std::vector<DeltaRow> compare_reports(const EvalReport& baseline, const EvalReport& other);

}  // namespace handqc

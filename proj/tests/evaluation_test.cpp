#include <gtest/gtest.h>

#include <random>

#include "handqc/annotation.hpp"
#include "handqc/error.hpp"
#include "handqc/evaluation.hpp"
#include "handqc/report_io.hpp"
#include "support/eval_oracle.hpp"
#include "support/scenes.hpp"

using namespace handqc;

namespace {

std::vector<ScoredMatch> scored(std::initializer_list<std::pair<double, bool>> items) {
  std::vector<ScoredMatch> out;
  for (const auto& [c, tp] : items) out.push_back({c, tp});
  return out;
}

}  // namespace

TEST(Iou, BasicCases) {
  const BBox a{0.5, 0.5, 0.2, 0.4};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, BBox{0.1, 0.1, 0.1, 0.1}), 0.0);
  EXPECT_NEAR(iou(CornerBox{0, 0, 2, 2}, CornerBox{1, 1, 3, 3}), 1.0 / 7.0, 1e-15);
}

TEST(Iou, DegenerateBoxFlagged) {
  const auto r = iou_checked(CornerBox{0, 0, 0, 1}, CornerBox{0, 0, 1, 1});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(iou_checked(CornerBox{0, 0, 1, 1}, CornerBox{0, 0, 1, 1}).degenerate);
}

TEST(Iou, SymmetricAndBounded) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto a = testing_support::random_box(rng), b = testing_support::random_box(rng);
    const double ab = iou(a, b);
    EXPECT_EQ(ab, iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(iou(a, a), 1.0, 1e-12);
    EXPECT_NEAR(ab, oracle::box_iou(a, b), 1e-12);
  }
}

TEST(Match, ExactHit) {
  const std::vector<Detection> dets{{0, 0.9, {0.5, 0.5, 0.2, 0.2}}};
  const std::vector<GroundTruthBox> gts{{0, {0.5, 0.5, 0.2, 0.2}}};
  const auto m = match_detections(dets, gts, 0.5);
  EXPECT_EQ(m.true_positives(), 1);
  EXPECT_EQ(m.false_positives(), 0);
  EXPECT_EQ(m.false_negatives(), 0);
  EXPECT_EQ(MatchOutcome::true_negatives(), 0);
}

TEST(Match, DuplicateDetectionIsFalsePositive) {
  const std::vector<GroundTruthBox> gts{{0, {0.5, 0.5, 0.2, 0.2}}};
  // Input order puts the weaker detection first; matching must follow confidence.
  const std::vector<Detection> dets{{0, 0.8, {0.51, 0.5, 0.2, 0.2}}, {0, 0.9, {0.5, 0.5, 0.2, 0.2}}};
  const auto m = match_detections(dets, gts, 0.5);
  EXPECT_EQ(m.detection_flags[1], MatchFlag::TruePositive);
  EXPECT_EQ(m.detection_flags[0], MatchFlag::FalsePositive);
  EXPECT_EQ(oracle::exhaustive_match(dets, gts, 0.5), (std::vector<int>{-1, 0}));
}

TEST(Match, ClassMismatchNeverMatches) {
  const std::vector<Detection> dets{{1, 0.9, {0.5, 0.5, 0.2, 0.2}}};
  const std::vector<GroundTruthBox> gts{{2, {0.5, 0.5, 0.2, 0.2}}};
  const auto m = match_detections(dets, gts, 0.5);
  EXPECT_EQ(m.false_positives(), 1);
  EXPECT_EQ(m.false_negatives(), 1);
}

TEST(Match, IouTieGoesToLowestIndex) {
  const std::vector<GroundTruthBox> gts{{0, {0.4, 0.5, 0.2, 0.2}}, {0, {0.6, 0.5, 0.2, 0.2}}};
  const std::vector<Detection> dets{{0, 0.9, {0.5, 0.5, 0.2, 0.2}}};
  EXPECT_EQ(match_detections(dets, gts, 0.3).matched_gt[0], 0);
}

TEST(Match, EmptyInputs) {
  const auto m = match_detections({}, {}, 0.5);
  EXPECT_EQ(m.true_positives() + m.false_positives() + m.false_negatives(), 0);
}

TEST(Match, AgreesWithExhaustiveEnumeration) {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto scene = testing_support::random_scene(seed);
    for (const double t : {0.3, 0.5, 0.75, 0.9}) {
      for (const auto& [key, gt] : scene.gts) {
        const auto& dets = scene.preds.at(key);
        const auto m = match_detections(dets, gt, t);
        ASSERT_EQ(m.matched_gt, oracle::exhaustive_match(dets, gt, t)) << "seed " << seed;
        EXPECT_EQ(m.true_positives() + m.false_negatives(), static_cast<int>(gt.size()));
      }
    }
  }
}

TEST(PrCurve, WorkedExamples) {
  auto c1 = precision_recall_curve(scored({{0.9, true}}), 1);
  ASSERT_EQ(c1.points.size(), 1u);
  EXPECT_EQ(c1.points[0].recall, 1.0);
  EXPECT_EQ(c1.points[0].precision, 1.0);

  auto c2 = precision_recall_curve(scored({{0.8, false}, {0.9, true}}), 1);
  ASSERT_EQ(c2.points.size(), 2u);
  EXPECT_EQ(c2.points[0].confidence, 0.9);
  EXPECT_EQ(c2.points[1].recall, 1.0);
  EXPECT_EQ(c2.points[1].precision, 0.5);

  auto c3 = precision_recall_curve(scored({{0.7, false}}), 1);
  EXPECT_EQ(c3.points[0].recall, 0.0);
  EXPECT_EQ(c3.points[0].precision, 0.0);
}

TEST(PrCurve, ZeroSupport) {
  const auto c = precision_recall_curve(scored({{0.9, false}}), 0);
  EXPECT_TRUE(c.zero_support());
  EXPECT_TRUE(c.points.empty());
  EXPECT_EQ(ap11(c), 0.0);
}

TEST(PrCurve, RecallNonDecreasing) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredMatch> m;
    int tps = 0;
    for (int i = 0; i < 12; ++i) {
      m.push_back({u(rng), u(rng) < 0.5});
      tps += m.back().true_positive;
    }
    const auto c = precision_recall_curve(m, tps + 2);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].recall, c.points[i - 1].recall);
      EXPECT_LE(c.points[i].confidence, c.points[i - 1].confidence);
    }
  }
}

TEST(Ap11, WorkedExamples) {
  EXPECT_DOUBLE_EQ(ap11(precision_recall_curve(scored({{0.9, true}}), 1)), 1.0);
  EXPECT_DOUBLE_EQ(ap11(precision_recall_curve(scored({{0.9, false}}), 1)), 0.0);
  EXPECT_DOUBLE_EQ(ap11(precision_recall_curve(scored({{0.9, true}, {0.8, false}}), 1)), 1.0);
  // Two GTs, hits at rank 1 and 3: P_interp is 1 up to recall 0.5, then 2/3.
  EXPECT_NEAR(ap11(precision_recall_curve(scored({{0.9, true}, {0.8, false}, {0.7, true}}), 2)),
              (6 * 1.0 + 5 * (2.0 / 3.0)) / 11.0, 1e-15);
}

TEST(Ap11, BoundedAndMonotoneUnderTopTruePositive) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 0.99);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ScoredMatch> m;
    int tps = 0;
    const int n = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) {
      m.push_back({u(rng), u(rng) < 0.4});
      tps += m.back().true_positive;
    }
    const int gt = tps + 1 + static_cast<int>(rng() % 3);
    const double before = ap11(precision_recall_curve(m, gt));
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 1.0);
    m.push_back({1.0, true});
    EXPECT_GE(ap11(precision_recall_curve(m, gt)), before - 1e-15);
  }
}

TEST(F1, Contract) {
  EXPECT_DOUBLE_EQ(f1(0.5, 0.5), 0.5);
  EXPECT_EQ(f1(0.0, 0.9), 0.0);
  EXPECT_EQ(f1(0.0, 0.0), 0.0);
  EXPECT_NEAR(f1(0.915, 0.901), 0.9079460352422908, 1e-12);
}

TEST(EvalConfig, ThresholdsAndValidation) {
  const auto t = EvalConfig::default_iou_thresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t.front(), 0.5);
  EXPECT_EQ(t[1], 0.55);
  EXPECT_EQ(t.back(), 0.95);
  EvalConfig bad;
  bad.iou_thresholds = {0.5, 0.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad.iou_thresholds = {1.0};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Evaluate, PerfectPredictionsScoreOne) {
  const auto scene = testing_support::random_scene(5);
  ImageDetections perfect;
  for (const auto& [key, gt] : scene.gts) {
    for (const auto& g : gt) perfect[key].push_back({g.class_id, 0.9, g.box});
  }
  const auto r = evaluate(perfect, scene.gts);
  EXPECT_DOUBLE_EQ(r.map_50_95, 1.0);
  EXPECT_DOUBLE_EQ(r.map_50, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
  EXPECT_EQ(r.true_negatives, 0);
}

TEST(Evaluate, Errors) {
  ImageGroundTruth empty{{"a", {}}};
  EXPECT_THROW(evaluate({}, empty), InvalidInputError);
  ImageGroundTruth gts{{"a", {{0, {0.5, 0.5, 0.1, 0.1}}}}};
  ImageDetections stray{{"b", {}}};
  EXPECT_THROW(evaluate(stray, gts), InvalidInputError);
  ImageDetections bad_class{{"a", {{9, 0.5, {0.5, 0.5, 0.1, 0.1}}}}};
  EXPECT_THROW(evaluate(bad_class, gts), InvalidInputError);
}

TEST(Evaluate, ZeroSupportClassExcludedFromMean) {
  ImageGroundTruth gts{{"a", {{0, {0.5, 0.5, 0.2, 0.2}}}}};
  ImageDetections preds{{"a", {{0, 0.9, {0.5, 0.5, 0.2, 0.2}}, {3, 0.9, {0.2, 0.2, 0.1, 0.1}}}}};
  const auto r = evaluate(preds, gts);
  EXPECT_TRUE(r.per_class[3].zero_support);
  EXPECT_FALSE(r.per_class[0].zero_support);
  EXPECT_DOUBLE_EQ(r.map_50_95, 1.0);
  EXPECT_EQ(r.false_positives, 1);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
}

TEST(Evaluate, ReferenceConfidenceFiltersHeadlineCounts) {
  ImageGroundTruth gts{{"a", {{0, {0.5, 0.5, 0.2, 0.2}}, {1, {0.2, 0.2, 0.2, 0.2}}}}};
  ImageDetections preds{{"a", {{0, 0.9, {0.5, 0.5, 0.2, 0.2}}, {1, 0.1, {0.2, 0.2, 0.2, 0.2}}}}};
  const auto r = evaluate(preds, gts);
  EXPECT_EQ(r.true_positives, 1);
  EXPECT_EQ(r.false_negatives, 1);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.map_50, 1.0);  // AP ignores the reference confidence
}

TEST(Evaluate, MatchesNaiveOracle) {
  const auto thresholds = EvalConfig::default_iou_thresholds();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto scene = testing_support::random_scene(seed);
    const auto r = evaluate(scene.preds, scene.gts);
    const auto o = oracle::evaluate(scene.preds, scene.gts, 5, thresholds);
    ASSERT_EQ(r.map.size(), o.map.size());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      EXPECT_NEAR(r.map[t], o.map[t], 1e-9) << "seed " << seed;
      for (int c = 0; c < 5; ++c) EXPECT_NEAR(r.per_class[c].ap[t], o.class_ap[c][t], 1e-9);
    }
    EXPECT_NEAR(r.map_50_95, o.map_50_95, 1e-9);
    // All detections pass a zero reference confidence, so headline counts equal the IoU-0.5 pass.
  }
}

TEST(Evaluate, CountsMatchOracleAtZeroReferenceConfidence) {
  EvalConfig cfg;
  cfg.reference_confidence = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto scene = testing_support::random_scene(seed);
    const auto r = evaluate(scene.preds, scene.gts, cfg);
    const auto o = oracle::evaluate(scene.preds, scene.gts, 5, {0.5});
    EXPECT_EQ(r.true_positives, o.counts[0].tp);
    EXPECT_EQ(r.false_positives, o.counts[0].fp);
    EXPECT_EQ(r.false_negatives, o.counts[0].fn);
    EXPECT_EQ(r.true_positives + r.false_negatives, r.num_gt);
  }
}

TEST(Evaluate, CocoAverageNeverExceedsMapAt50) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto scene = testing_support::random_scene(seed);
    const auto r = evaluate(scene.preds, scene.gts);
    EXPECT_LE(r.map_50_95, r.map_50 + 1e-12) << "seed " << seed;
    double mean = 0;
    for (double m : r.map) mean += m;
    EXPECT_NEAR(r.map_50_95, mean / 10.0, 1e-15);
  }
}

TEST(Evaluate, SingleThresholdCustomRange) {
  EvalConfig cfg;
  cfg.iou_thresholds = EvalConfig::threshold_range(0.3, 0.7, 0.2);
  ASSERT_EQ(cfg.iou_thresholds, (std::vector<double>{0.3, 0.5, 0.7}));
  const auto scene = testing_support::random_scene(9);
  const auto r = evaluate(scene.preds, scene.gts, cfg);
  EXPECT_EQ(r.map.size(), 3u);
  EXPECT_EQ(r.map_50, r.map[1]);
}

TEST(Compare, Table6Deltas) {
  EvalReport a, b;
  a.classes = b.classes = {"open"};
  a.map_50_95 = 0.753;
  b.map_50_95 = 0.745;
  auto rows = compare_reports(a, b);
  EXPECT_EQ(rows[0].metric, "mAP@0.5:0.95");
  EXPECT_EQ(format_metric(rows[0].dropped), "0.008");
  a.map_50_95 = 0.757;
  EXPECT_EQ(format_metric(compare_reports(a, b)[0].dropped), "0.012");
}

TEST(Compare, IdenticalReportsGiveZero) {
  const auto scene = testing_support::random_scene(2);
  const auto r = evaluate(scene.preds, scene.gts);
  for (const auto& row : compare_reports(r, r)) EXPECT_EQ(row.dropped, 0.0) << row.metric;
}

TEST(Compare, IncomparableReports) {
  EvalReport a, b;
  a.classes = {"open"};
  b.classes = {"close"};
  EXPECT_THROW(compare_reports(a, b), IncomparableError);
  b.classes = a.classes;
  b.iou_thresholds = {0.5};
  EXPECT_THROW(compare_reports(a, b), IncomparableError);
}

TEST(ReportIo, JsonRoundTrip) {
  const auto scene = testing_support::random_scene(4);
  EvalConfig cfg;
  cfg.class_names = {"open", "close", "pinch_open", "pinch_close", "flip"};
  const auto r = evaluate(scene.preds, scene.gts, cfg);
  const auto back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back.classes, r.classes);
  EXPECT_EQ(back.map, r.map);
  EXPECT_EQ(back.map_50_95, r.map_50_95);
  ASSERT_EQ(back.per_class.size(), r.per_class.size());
  EXPECT_EQ(back.per_class[2].ap, r.per_class[2].ap);
  for (const auto& row : compare_reports(r, back)) EXPECT_EQ(row.dropped, 0.0);
  EXPECT_THROW(report_from_json(nlohmann::json{{"classes", 3}}), ParseError);
}

TEST(ReportIo, MetricFormatting) {
  EXPECT_EQ(format_metric(0.0080000000001), "0.008");
  EXPECT_EQ(format_metric(-0.0000001), "0.000");
  EXPECT_EQ(format_metric(0.9079460352), "0.908");
}

TEST(LabelText, PredictionParsing) {
  const auto dets = parse_predictions("1 0.75 0.5 0.5 0.2 0.3\n\n4 0.1 0.2 0.2 0.1 0.1\n", 5);
  ASSERT_EQ(dets.size(), 2u);
  EXPECT_EQ(dets[0].class_id, 1);
  EXPECT_EQ(dets[0].confidence, 0.75);
  EXPECT_EQ(parse_predictions(format_predictions(dets), 5), dets);
  try {
    parse_predictions("0 0.5 0.5 0.5 0.2 0.2\n0 1.5 0.5 0.5 0.2 0.2\n", 5);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_predictions("0 0.5 0.5 0.5 0.2\n", 5), ParseError);
}

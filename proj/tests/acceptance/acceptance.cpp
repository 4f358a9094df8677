// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "handqc/augment.hpp"
#include "handqc/compliance.hpp"
#include "handqc/dataset.hpp"
#include "handqc/evaluation.hpp"
#include "handqc/imaging.hpp"
#include "handqc/nn/grad_check.hpp"
#include "handqc/nn/heads.hpp"
#include "handqc/nn/se_block.hpp"
#include "handqc/nn/transformer.hpp"
#include "handqc/report_io.hpp"
#include "support/eval_oracle.hpp"
#include "support/scenes.hpp"

using namespace handqc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 -------------------------------------------------------------------------------------------------

Outcome metric_engine_oracle() {
  constexpr int kScenes = 1000;
  const auto thresholds = EvalConfig::default_iou_thresholds();
  EvalConfig cfg;
  cfg.reference_confidence = 0.0;  // headline counts then cover every detection
  double worst = 0.0;
  int count_mismatches = 0;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 0; seed < kScenes; ++seed) {
    const auto scene = testing_support::random_scene(seed, 5, 4, 5);
    const auto r = evaluate(scene.preds, scene.gts, cfg);
    const auto o = oracle::evaluate(scene.preds, scene.gts, 5, thresholds);

    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      worst = std::max(worst, std::abs(r.map[t] - o.map[t]));
      for (int c = 0; c < 5; ++c) worst = std::max(worst, std::abs(r.per_class[c].ap[t] - o.class_ap[c][t]));

      oracle::Counts got;
      for (const auto& [key, gt] : scene.gts) {
        std::vector<Detection> dets;
        if (auto it = scene.preds.find(key); it != scene.preds.end()) dets = it->second;
        const auto m = match_detections(dets, gt, thresholds[t]);
        got.tp += m.true_positives();
        got.fp += m.false_positives();
        got.fn += m.false_negatives();
      }
      if (got.tp != o.counts[t].tp || got.fp != o.counts[t].fp || got.fn != o.counts[t].fn) ++count_mismatches;
    }
    worst = std::max(worst, std::abs(r.map_50_95 - o.map_50_95));
    if (r.true_positives != o.counts[0].tp || r.false_positives != o.counts[0].fp ||
        r.false_negatives != o.counts[0].fn || r.true_negatives != 0) {
      ++count_mismatches;
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = count_mismatches == 0 && worst <= 1e-9 && elapsed < 30.0;
  out.detail = std::to_string(kScenes) + " scenes, count mismatches " + std::to_string(count_mismatches) +
               ", max AP/mAP deviation " + fmt("%.2e", worst) + " (tol 1e-9), " + fmt("%.2f", elapsed) +
               " s (limit 30 s)";
  return out;
}

// 2 -------------------------------------------------------------------------------------------------

EvalReport single_value_report(double map) {
  EvalReport r;
  r.classes = gesture_names();
  r.iou_thresholds = EvalConfig::default_iou_thresholds();
  r.map.assign(r.iou_thresholds.size(), map);
  r.map_50 = map;
  r.map_50_95 = map;
  return r;
}

Outcome reference_deltas() {
  struct Pair {
    const char* model;
    double clean, noisy;
    const char* dropped;
  };
  const Pair pairs[] = {{"CSPNet", 0.753, 0.745, "0.008"},       {"GhostNet", 0.735, 0.726, "0.009"},
                        {"MobileNetv3", 0.701, 0.694, "0.007"},  {"Darknet-53", 0.755, 0.747, "0.008"},
                        {"EfficientNet-B1", 0.757, 0.745, "0.012"}, {"TinyNet", 0.703, 0.701, "0.002"},
                        {"CSPNet-P6", 0.776, 0.769, "0.007"},    {"P6-attention", 0.782, 0.771, "0.011"}};
  Outcome out;
  int ok = 0;
  for (const auto& p : pairs) {
    const auto rows = compare_reports(single_value_report(p.clean), single_value_report(p.noisy));
    const auto it = std::find_if(rows.begin(), rows.end(), [](const DeltaRow& r) { return r.metric == "mAP@0.5:0.95"; });
    const bool good = it != rows.end() && format_metric(it->dropped) == p.dropped &&
                      format_metric(it->baseline) == format_metric(p.clean) &&
                      delta_csv({*it}).find("," + std::string(p.dropped) + "\n") != std::string::npos;
    if (good) {
      ++ok;
    } else {
      out.pass = false;
      out.detail += std::string(p.model) + " gave " + (it == rows.end() ? "nothing" : format_metric(it->dropped)) +
                    "; ";
    }
  }
  out.detail += std::to_string(ok) + "/8 drops reproduced (e.g. 0.753 vs 0.745 -> 0.008, 0.757 vs 0.745 -> 0.012)";
  return out;
}

// 3 -------------------------------------------------------------------------------------------------

Outcome f1_contract() {
  int violations = 0, points = 0;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double p = i / 100.0, r = j / 100.0;
      ++points;
      const double v = f1(p, r);
      if (f1(0.0, r) != 0.0 || f1(p, 0.0) != 0.0) ++violations;
      if (std::abs(f1(p, p) - p) > 1e-15) ++violations;
      if (v != f1(r, p) || v < std::min(p, r) - 1e-15 || v > std::max(p, r) + 1e-15) ++violations;
      if (p + r > 0 && std::abs(v - 2 * p * r / (p + r)) > 1e-15) ++violations;
    }
  }
  return {violations == 0, std::to_string(points) + " grid points on [0,1]^2, " + std::to_string(violations) +
                               " violations of f1(0,r)=0, f1(p,p)=p, symmetry, harmonic-mean bounds"};
}

// 4 -------------------------------------------------------------------------------------------------

double direct_laplacian_variance(const ImageArray<double>& img) {
  std::vector<double> r;
  for (Eigen::Index y = 1; y + 1 < img.rows(); ++y) {
    for (Eigen::Index x = 1; x + 1 < img.cols(); ++x) {
      r.push_back(img(y - 1, x) + img(y + 1, x) + img(y, x - 1) + img(y, x + 1) - 4 * img(y, x));
    }
  }
  double mean = 0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double var = 0;
  for (double v : r) var += (v - mean) * (v - mean);
  return var / static_cast<double>(r.size());
}

Outcome blur_metric() {
  Outcome out;
  const double uniform = blur_score(GrayImage::constant(16, 12, 77.0));
  ImageArray<double> impulse = ImageArray<double>::Zero(5, 5);
  impulse(2, 2) = 1.0;
  const double imp = blur_score(GrayImage(impulse));
  const double oracle = direct_laplacian_variance(impulse);
  const bool impulse_ok = std::abs(imp - 20.0 / 9.0) < 1e-12 && std::abs(oracle - 20.0 / 9.0) < 1e-12;

  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    ImageArray<double> a(64, 64);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    GrayImage img(a);
    double prev = blur_score(img);
    bool ok = true;
    for (int k = 0; k < 6; ++k) {
      img = box_blur(img);
      const double s = blur_score(img);
      ok = ok && s <= prev;
      prev = s;
    }
    monotone += ok;
  }
  const bool categories = categorize(60) == BlurCategory::Clear && categorize(30) == BlurCategory::Blurred &&
                          categorize(5) == BlurCategory::TotallyBlurred;
  out.pass = uniform == 0.0 && impulse_ok && monotone == 5 && categories;
  out.detail = "uniform " + fmt("%g", uniform) + ", impulse " + fmt("%.15f", imp) + " vs 20/9 (direct oracle " +
               fmt("%.15f", oracle) + "), " + std::to_string(monotone) +
               "/5 random 64x64 images non-increasing under box blur, 60/30/5 -> " +
               std::string(to_string(categorize(60))) + "/" + std::string(to_string(categorize(30))) + "/" +
               std::string(to_string(categorize(5)));
  return out;
}

// 5 -------------------------------------------------------------------------------------------------

Outcome gradient_verification() {
  nn::BlockCheckOptions opts;  // 20 configurations, n <= 4, d <= 16, C <= 8
  const auto t0 = Clock::now();
  const auto rows = nn::run_block_checks(opts);
  const double elapsed = seconds_since(t0);
  int se = 0, encoder = 0, failed = 0;
  double worst_se = 0.0, worst_encoder = 0.0;
  for (const auto& r : rows) {
    if (r.block == "se_block") {
      ++se;
      worst_se = std::max(worst_se, r.max_relative_error);
      if (!(r.max_relative_error < 1e-4)) ++failed;
    } else if (r.block == "transformer_encoder") {
      ++encoder;
      worst_encoder = std::max(worst_encoder, r.max_relative_error);
      if (!(r.max_relative_error < 1e-4)) ++failed;
    } else if (!r.passed) {
      ++failed;
    }
  }
  Outcome out;
  out.pass = failed == 0 && se >= 20 && encoder >= 20 && elapsed < 60.0;
  out.detail = std::to_string(se) + " SE configs (max rel. err " + fmt("%.2e", worst_se) + "), " +
               std::to_string(encoder) + " encoder configs (max rel. err " + fmt("%.2e", worst_encoder) +
               "), tolerance 1e-4, " + std::to_string(failed) + " failures, " + fmt("%.1f", elapsed) +
               " s (limit 60 s)";
  return out;
}

// 6 -------------------------------------------------------------------------------------------------

Outcome structural_identities() {
  using namespace handqc::nn;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_matrix = [&](Index r, Index c) { return MatrixXd(MatrixXd::NullaryExpr(r, c, [&](Index, Index) { return n(rng); })); };

  const MatrixXd x = random_matrix(4, 16);
  const double identity_dev = (transformer_encoder_forward(x, TransformerParams<double>::zeros(16, 4)) - x).cwiseAbs().maxCoeff();

  Tensor<double> t({6, 5, 3});
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = n(rng);
  const auto y = se_forward(t, SEParams<double>::zeros(6));
  const bool half_exact = (y.data().array() == 0.5 * t.data().array()).all();

  auto p = TransformerParams<double>::random(16, 4, rng);
  p.wq.setZero();
  p.wk.setZero();
  const MatrixXd xs = random_matrix(5, 16);
  const MatrixXd v = linear(xs, p.wv, p.bv);
  const MatrixXd mean_v = v.colwise().mean();
  const MatrixXd projected = linear(mean_v, p.wo, p.bo);
  const MatrixXd attn = mha_forward(xs, p);
  double mean_dev = 0.0;
  for (Index r = 0; r < attn.rows(); ++r) mean_dev = std::max(mean_dev, (attn.row(r) - projected.row(0)).cwiseAbs().maxCoeff());

  Outcome out;
  out.pass = identity_dev < 1e-12 && half_exact && mean_dev < 1e-12;
  out.detail = "zero encoder max |y-x| " + fmt("%.1e", identity_dev) + " (tol 1e-12), zero SE scales by 0.5 " +
               (half_exact ? "exactly" : "NOT exactly") + ", zero-QK attention vs projected mean " +
               fmt("%.1e", mean_dev) + " (tol 1e-12)";
  return out;
}

// 7 -------------------------------------------------------------------------------------------------

Outcome head_calculus() {
  using namespace handqc::nn;
  const auto p5 = head_shapes({HeadVariant::P5, 3, 5}, 640);
  const auto p6 = head_shapes({HeadVariant::P6, 3, 5}, 640);
  const std::vector<HeadShape> want5 = {{8, 80, 80, 30}, {16, 40, 40, 30}, {32, 20, 20, 30}};
  auto want6 = want5;
  want6.push_back({64, 10, 10, 30});
  std::string grids;
  for (const auto& s : p6) grids += (grids.empty() ? "" : ",") + std::to_string(s.grid_h);
  return {p5 == want5 && p6 == want6,
          "P5 " + std::to_string(p5.size()) + " scales, P6 " + std::to_string(p6.size()) + " scales {" + grids +
              "} at 640 px, " + std::to_string(p6.empty() ? 0 : p6.front().channels) + " channels"};
}

// 8 -------------------------------------------------------------------------------------------------

Outcome dataset_splits() {
  DatasetManifest m;
  m.name = "synthetic";
  auto add = [&](std::size_t count, char prefix, double score) {
    char buf[32];
    for (std::size_t i = 0; i < count; ++i) {
      std::snprintf(buf, sizeof buf, "%c%05zu.pgm", prefix, i);
      AnnotatedImage e;
      e.path = buf;
      e.width = 640;
      e.height = 480;
      e.blur = {score, categorize(score)};
      m.entries.push_back(e);
    }
  };
  add(5376, 'c', 120.0);
  add(859, 'b', 30.0);
  add(215, 't', 4.0);
  const auto roundtrip = manifest_from_json(to_json(m));
  const auto s = build_splits(roundtrip);
  const bool ok = s.clean.entries.size() == 5376 && s.mixed.entries.size() == 6450 && !s.warning &&
                  s.mixed.counts() == CategoryCounts{5376, 859, 215};
  return {ok, "dataset1 " + std::to_string(s.clean.entries.size()) + " (want 5376), dataset2 " +
                  std::to_string(s.mixed.entries.size()) + " (want 6450)"};
}

// 9 -------------------------------------------------------------------------------------------------

LabeledImage random_labeled(std::mt19937_64& rng, int w, int h) {
  LabeledImage s{Raster(w, h, 3), {}};
  for (auto& p : s.image.pixels) p = static_cast<std::uint8_t>(rng() & 0xFF);
  std::uniform_real_distribution<double> c(0.0, 1.0), size(0.02, 0.7);
  const int n = static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i) s.boxes.push_back({static_cast<int>(rng() % 5), {c(rng), c(rng), size(rng), size(rng)}});
  return s;
}

Outcome augmentation_invariants() {
  constexpr int kCases = 200;
  std::mt19937_64 rng(21);
  int flip_ok = 0, mosaic_ok = 0, roundtrip_ok = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto s = random_labeled(rng, 1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40));
    const auto back = flip_lr(flip_lr(s));
    bool same = back.image == s.image && back.boxes.size() == s.boxes.size();
    for (std::size_t b = 0; same && b < s.boxes.size(); ++b) {
      same = back.boxes[b].class_id == s.boxes[b].class_id && std::abs(back.boxes[b].box.cx - s.boxes[b].box.cx) < 1e-15 &&
             back.boxes[b].box.cy == s.boxes[b].box.cy && back.boxes[b].box.w == s.boxes[b].box.w &&
             back.boxes[b].box.h == s.boxes[b].box.h;
    }
    flip_ok += same;
  }
  for (int i = 0; i < kCases; ++i) {
    std::vector<LabeledImage> inputs;
    std::size_t total = 0;
    for (int k = 0; k < 4; ++k) {
      inputs.push_back(random_labeled(rng, 8 + static_cast<int>(rng() % 120), 8 + static_cast<int>(rng() % 120)));
      total += inputs.back().boxes.size();
    }
    MosaicOptions opts;
    opts.canvas = 160;
    opts.seed = static_cast<std::uint64_t>(i);
    const auto out = mosaic(inputs, opts);
    bool ok = out.boxes.size() <= total;
    for (const auto& b : out.boxes) {
      const auto c = b.box.corners();
      ok = ok && b.box.is_valid() && b.box.cx - b.box.w / 2 >= -1e-12 && b.box.cx + b.box.w / 2 <= 1 + 1e-12 &&
           b.box.cy - b.box.h / 2 >= -1e-12 && b.box.cy + b.box.h / 2 <= 1 + 1e-12 && c.x1 >= 0 && c.y2 <= 1;
    }
    mosaic_ok += ok;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0), sz(1e-6, 1.0);
  auto grid = [](double v) { return std::round(v * 1e6) / 1e6; };
  for (int i = 0; i < kCases; ++i) {
    std::vector<GestureBox> boxes;
    const int n = static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) {
      boxes.push_back({kAllGestures[rng() % kGestureCount], {grid(u(rng)), grid(u(rng)), grid(sz(rng)), grid(sz(rng))}});
    }
    const auto text = write_annotation(boxes);
    roundtrip_ok += parse_annotation(text) == boxes && write_annotation(parse_annotation(text)) == text;
  }
  return {flip_ok == kCases && mosaic_ok == kCases && roundtrip_ok == kCases,
          "flip involution " + std::to_string(flip_ok) + "/" + std::to_string(kCases) + ", mosaic boxes in [0,1]^2 " +
              "with count <= inputs " + std::to_string(mosaic_ok) + "/" + std::to_string(kCases) +
              ", annotation round trip " + std::to_string(roundtrip_ok) + "/" + std::to_string(kCases)};
}

// 10 ------------------------------------------------------------------------------------------------

std::vector<FrameLabel> frames(const std::vector<std::optional<GestureClass>>& labels) {
  std::vector<FrameLabel> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({static_cast<int>(i), labels[i], 0.9});
  return out;
}

Outcome compliance() {
  using G = GestureClass;
  std::vector<std::optional<G>> taps;
  for (int r = 0; r < 6; ++r)
    for (int k = 0; k < 5; ++k) taps.push_back(r % 2 ? G::Close : G::Open);
  ProtocolSpec spec;
  spec.fps = 30.0;
  const auto a = check_alternation(frames(taps), spec);
  const bool first = a.transitions == 5 && a.tap_frequency == 2.5 && a.compliant;

  const auto b = check_alternation(frames(std::vector<std::optional<G>>(30, G::Open)), spec);
  const bool second = b.transitions == 0 && !b.compliant;

  ProtocolSpec pinch;
  pinch.first = G::PinchOpen;
  pinch.second = G::PinchClose;
  const auto c = check_alternation(frames({G::Open, G::Close, G::Flip, G::Open, G::Close}), pinch);
  const std::map<G, int> want{{G::Open, 2}, {G::Close, 2}, {G::Flip, 1}};
  const bool third = !c.compliant && c.unexpected == want;

  std::mt19937_64 rng(31);
  int reversal_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::optional<G>> seq;
    const int n = 1 + static_cast<int>(rng() % 80);
    for (int i = 0; i < n; ++i) {
      const auto pick = rng() % 10;
      seq.push_back(pick < 4 ? std::optional(G::Open) : pick < 8 ? std::optional(G::Close)
                                                   : pick == 8 ? std::optional(G::Flip) : std::nullopt);
    }
    auto rev = seq;
    std::reverse(rev.begin(), rev.end());
    const auto f = check_alternation(frames(seq), spec);
    const auto r = check_alternation(frames(rev), spec);
    reversal_ok += f.transitions == r.transitions && f.tap_frequency == r.tap_frequency && f.compliant == r.compliant;
  }
  return {first && second && third && reversal_ok == 100,
          std::string("alternating 30 frames: ") + std::to_string(a.transitions) + " transitions, " +
              fmt("%.2f", a.tap_frequency) + " taps/s, " + (a.compliant ? "compliant" : "non-compliant") +
              "; constant: " + (b.compliant ? "compliant" : "non-compliant") + "; wrong pair: " +
              (third ? "non-compliant with histogram 2/2/1" : "unexpected result") + "; reversal invariant " +
              std::to_string(reversal_ok) + "/100"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric-engine oracle equivalence", metric_engine_oracle},
      {"reference mAP drop reproduction", reference_deltas},
      {"F1 contract", f1_contract},
      {"blur metric", blur_metric},
      {"gradient verification", gradient_verification},
      {"structural identities", structural_identities},
      {"head calculus", head_calculus},
      {"dataset splits", dataset_splits},
      {"augmentation invariants", augmentation_invariants},
      {"compliance", compliance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

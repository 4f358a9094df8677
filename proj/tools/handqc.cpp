#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "handqc/annotation.hpp"
#include "handqc/augment.hpp"
#include "handqc/compliance.hpp"
#include "handqc/dataset.hpp"
#include "handqc/error.hpp"
#include "handqc/evaluation.hpp"
#include "handqc/imaging.hpp"
#include "handqc/nn/grad_check.hpp"
#include "handqc/nn/heads.hpp"
#include "handqc/pnm.hpp"
#include "handqc/report_io.hpp"
#include "handqc/train_config.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace handqc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

/// Bad flag values, detected before any file is read.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag + ": '" + s + "' is not a number");
  }
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void write_or_print(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    write_text_file(*path, text);
  } else {
    std::cout << text;
  }
}

BlurThresholds parse_thresholds(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw UsageError("--thresholds expects low,high");
  BlurThresholds t{parse_number(parts[0], "--thresholds"), parse_number(parts[1], "--thresholds")};
  try {
    t.validate();
  } catch (const ConfigError& e) {
    throw UsageError(std::string("--thresholds: ") + e.what());
  }
  return t;
}

GestureClass parse_gesture(const std::string& s, const std::string& flag) {
  const auto g = gesture_from_string(s);
  if (!g) throw UsageError(flag + ": unknown gesture '" + s + "'");
  return *g;
}

/// Worker count from HANDQC_WORKERS, defaulting to the hardware concurrency.
unsigned worker_count() {
  if (const char* env = std::getenv("HANDQC_WORKERS"); env && *env) {
    const double v = parse_number(env, "HANDQC_WORKERS");
    if (v < 1 || v != std::floor(v) || v > 256) throw UsageError("HANDQC_WORKERS must be an integer in [1, 256]");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) over a pool of workers; results land by index, so the outcome does not
/// depend on scheduling. The first failure in index order is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  for (unsigned w = 1; w < count; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<fs::path> collect_images(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && has_pnm_extension(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw InvalidInputError("no such file or directory: " + in);
    }
  }
  return out;
}

// ---- blur ---------------------------------------------------------------------------------------

struct BlurArgs {
  std::vector<std::string> inputs;
  std::optional<std::string> out;
  std::string thresholds = "10,50";
  bool with_std = false;
  std::optional<std::string> histogram;
  int bins = 40;
};

int run_blur(const BlurArgs& a) {
  const auto t = parse_thresholds(a.thresholds);
  if (a.bins < 1) throw UsageError("--bins must be positive");
  const unsigned workers = worker_count();

  const auto paths = collect_images(a.inputs);
  std::vector<BlurRecord> records(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) {
    try {
      records[i] = assess_blur(to_grayscale(read_pnm(paths[i])), t);
    } catch (const Error& e) {
      throw InvalidInputError(paths[i].generic_string() + ": " + e.what());
    }
  });

  std::string csv = a.with_std ? "path,score,category,std\n" : "path,score,category\n";
  CategoryCounts counts;
  std::vector<double> scores;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& r = records[i];
    csv += paths[i].generic_string() + "," + format_fixed(r.score, 6) + "," + std::string(to_string(r.category));
    if (a.with_std) csv += "," + format_fixed(std::sqrt(r.score), 6);
    csv += "\n";
    scores.push_back(r.score);
    switch (r.category) {
      case BlurCategory::Clear: ++counts.clear; break;
      case BlurCategory::Blurred: ++counts.blurred; break;
      case BlurCategory::TotallyBlurred: ++counts.totally_blurred; break;
    }
  }
  write_or_print(a.out, csv);
  if (a.histogram) {
    double hi = 2.0 * t.high;
    for (double s : scores) hi = std::max(hi, s);
    write_text_file(*a.histogram, svg::histogram(scores, 0.0, hi, a.bins, {t.low, t.high}, "blur scores"));
  }
  if (a.out) {
    std::cout << "images           " << counts.total() << "\n"
              << "clear            " << counts.clear << "\n"
              << "blurred          " << counts.blurred << "\n"
              << "totally_blurred  " << counts.totally_blurred << "\n";
  }
  return kExitOk;
}

// ---- dataset ------------------------------------------------------------------------------------

struct DatasetBuildArgs {
  std::string images;
  std::optional<std::string> labels;
  std::string name = "dataset";
  std::string thresholds = "10,50";
  std::optional<double> mix;
  std::string out;
  std::optional<std::string> clean_out;
  std::optional<std::string> mixed_out;
};

int run_dataset_build(const DatasetBuildArgs& a) {
  const auto t = parse_thresholds(a.thresholds);
  if (a.mix && !(*a.mix >= 0.0 && *a.mix < 1.0)) throw UsageError("--mix must lie in [0, 1)");

  const auto manifest = build_manifest(a.images, a.labels ? std::optional<fs::path>(*a.labels) : std::nullopt, t,
                                       a.name);
  write_text_file(a.out, to_json(manifest).dump(2) + "\n");
  const auto split = build_splits(manifest, a.mix);
  if (a.clean_out) write_text_file(*a.clean_out, to_json(split.clean).dump(2) + "\n");
  if (a.mixed_out) write_text_file(*a.mixed_out, to_json(split.mixed).dump(2) + "\n");

  const auto c = manifest.counts();
  std::cout << "images           " << c.total() << "\n"
            << "clear            " << c.clear << "\n"
            << "blurred          " << c.blurred << "\n"
            << "totally_blurred  " << c.totally_blurred << "\n"
            << "clean set        " << split.clean.entries.size() << "\n"
            << "mixed set        " << split.mixed.entries.size() << " (non-clear " << split.achieved_non_clear
            << " of " << split.requested_non_clear << " requested, mix "
            << format_fixed(split.achieved_mix(), 3) << ")\n";
  if (split.warning) std::cerr << "warning: " << *split.warning << "\n";
  return kExitOk;
}

int run_dataset_config(const std::string& path) {
  std::cout << format_train_config(load_train_config(path));
  return kExitOk;
}

// ---- eval ---------------------------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string pred;
  std::string classes;
  std::string iou = "0.5:0.95:0.05";
  double conf = 0.25;
  std::optional<std::string> out;
  std::optional<std::string> csv;
  std::string name = "model";
  std::optional<std::string> svg;
};

std::vector<double> parse_iou(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) {
    const double v = parse_number(parts[0], "--iou");
    if (!(v > 0.0 && v <= 1.0)) throw UsageError("--iou thresholds must lie in (0, 1]");
    return {v};
  }
  if (parts.size() != 3) throw UsageError("--iou expects a:b:step or a single threshold");
  const double lo = parse_number(parts[0], "--iou"), hi = parse_number(parts[1], "--iou"),
               step = parse_number(parts[2], "--iou");
  if (!(lo > 0.0 && hi <= 1.0 && lo <= hi && step > 0.0)) throw UsageError("--iou expects 0 < a <= b <= 1, step > 0");
  return EvalConfig::threshold_range(lo, hi, step);
}

std::vector<std::pair<std::string, PRCurve>> curves_at_half(const ImageDetections& preds, const ImageGroundTruth& gts,
                                                            const EvalConfig& cfg) {
  static const std::vector<Detection> kNone;
  std::vector<MatchOutcome> outcomes;
  outcomes.reserve(gts.size());
  std::vector<ImageMatch> images;
  for (const auto& [image, gt] : gts) {
    const auto it = preds.find(image);
    const auto& dets = it == preds.end() ? kNone : it->second;
    outcomes.push_back(match_detections(dets, gt, 0.5));
  }
  std::size_t i = 0;
  for (const auto& [image, gt] : gts) {
    const auto it = preds.find(image);
    images.push_back({it == preds.end() ? kNone : it->second, gt, &outcomes[i++]});
  }
  std::vector<std::pair<std::string, PRCurve>> out;
  for (int c = 0; c < cfg.num_classes; ++c) out.emplace_back(cfg.class_name(c), precision_recall_curve(images, c));
  return out;
}

int run_eval(const EvalArgs& a) {
  EvalConfig cfg;
  cfg.iou_thresholds = parse_iou(a.iou);
  if (!a.classes.empty()) {
    cfg.class_names = split(a.classes, ',');
    for (const auto& n : cfg.class_names)
      if (n.empty()) throw UsageError("--classes contains an empty name");
  } else {
    cfg.class_names = gesture_names();
  }
  cfg.num_classes = static_cast<int>(cfg.class_names.size());
  if (!(a.conf >= 0.0 && a.conf <= 1.0)) throw UsageError("--conf must lie in [0, 1]");
  cfg.reference_confidence = a.conf;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const auto gts = load_ground_truth_dir(a.gt, cfg.num_classes);
  const auto preds = load_prediction_dir(a.pred, cfg.num_classes);
  const auto report = evaluate(preds, gts, cfg);

  const std::string json = to_json(report).dump(2) + "\n";
  write_or_print(a.out, json);
  if (a.csv) write_text_file(*a.csv, report_csv(report, a.name));
  if (a.svg) write_text_file(*a.svg, svg::pr_curves(curves_at_half(preds, gts, cfg), a.name + " PR @ IoU 0.5"));

  if (a.out) {
    std::cout << "images " << report.num_images << ", ground truth " << report.num_gt << ", detections "
              << report.num_detections << "\n"
              << "P " << format_metric(report.precision) << "  R " << format_metric(report.recall) << "  F1 "
              << format_metric(report.f1) << "  (conf >= " << format_fixed(report.reference_confidence, 2)
              << ", IoU 0.5; TP " << report.true_positives << " FP " << report.false_positives << " FN "
              << report.false_negatives << ")\n"
              << "mAP@0.5 " << format_metric(report.map_50) << "  mAP@0.5:0.95 " << format_metric(report.map_50_95)
              << "\n";
    for (const auto& c : report.per_class) {
      std::cout << "  " << c.name << ": AP@0.5:0.95 " << format_metric(c.ap_50_95) << "  gt " << c.gt_count
                << (c.zero_support ? "  (no ground truth, excluded)" : "") << "\n";
    }
  }
  return kExitOk;
}

// ---- compare ------------------------------------------------------------------------------------

int run_compare(const std::string& base, const std::string& other, const std::optional<std::string>& csv) {
  auto load = [](const std::string& p) {
    try {
      return report_from_json(nlohmann::json::parse(read_text_file(p)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(p + ": " + e.what());
    }
  };
  const auto rows = compare_reports(load(base), load(other));
  std::cout << delta_table(rows);
  if (csv) write_text_file(*csv, delta_csv(rows));
  return kExitOk;
}

// ---- blocks -------------------------------------------------------------------------------------

int run_blocks_check(const nn::BlockCheckOptions& opts) {
  if (opts.configs < 1) throw UsageError("--configs must be positive");
  if (opts.max_tokens < 1 || opts.max_width < 1 || opts.max_channels < 1) {
    throw UsageError("size limits must be positive");
  }
  const auto rows = nn::run_block_checks(opts);
  bool ok = true;
  std::printf("%-20s %-22s %-16s %-10s %s\n", "block", "config", "max rel. error", "tolerance", "result");
  for (const auto& r : rows) {
    std::printf("%-20s %-22s %-16.3e %-10.0e %s\n", r.block.c_str(), r.config.c_str(), r.max_relative_error,
                r.tolerance, r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  std::printf("%zu checks, %s\n", rows.size(), ok ? "all passed" : "FAILURES");
  return ok ? kExitOk : kExitFailed;
}

int run_blocks_heads(const std::string& variant, int input, int classes, int anchors) {
  nn::HeadConfig cfg;
  if (variant == "p5" || variant == "P5") {
    cfg.variant = nn::HeadVariant::P5;
  } else if (variant == "p6" || variant == "P6") {
    cfg.variant = nn::HeadVariant::P6;
  } else {
    throw UsageError("--variant must be p5 or p6");
  }
  cfg.num_classes = classes;
  cfg.anchors_per_scale = anchors;
  std::vector<nn::HeadShape> shapes;
  try {
    shapes = nn::head_shapes(cfg, input);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  std::printf("%-8s %-8s %-8s %s\n", "stride", "grid_h", "grid_w", "channels");
  for (const auto& s : shapes) std::printf("%-8d %-8d %-8d %d\n", s.stride, s.grid_h, s.grid_w, s.channels);
  return kExitOk;
}

// ---- augment ------------------------------------------------------------------------------------

LabeledImage load_labeled(const std::string& image, const std::optional<std::string>& labels, int classes) {
  LabeledImage s{read_pnm(fs::path(image)), {}};
  if (labels) s.boxes = parse_ground_truth(read_text_file(*labels), classes);
  return s;
}

void save_labeled(const LabeledImage& s, const std::string& image, const std::optional<std::string>& labels) {
  write_pnm(fs::path(image), s.image);
  if (labels) write_text_file(*labels, format_ground_truth(s.boxes));
}

struct AugmentIo {
  std::string image;
  std::optional<std::string> labels;
  std::string out_image;
  std::optional<std::string> out_labels;
  int classes = kGestureCount;
};

void check_io(const AugmentIo& io) {
  if (io.classes < 1) throw UsageError("--num-classes must be positive");
  if (io.out_labels && !io.labels) throw UsageError("--out-labels needs --labels");
}

struct AffineArgs {
  AugmentIo io;
  double translate = 0.1;
  double scale = 0.5;
  std::uint64_t seed = 0;
  std::optional<double> tx, ty, zoom;
};

int run_affine(const AffineArgs& a) {
  check_io(a.io);
  if (!(a.translate >= 0.0 && a.translate <= 1.0)) throw UsageError("--translate must lie in [0, 1]");
  if (!(a.scale >= 0.0 && a.scale < 1.0)) throw UsageError("--scale must lie in [0, 1)");
  if (a.zoom && !(*a.zoom > 0.0)) throw UsageError("--zoom must be positive");

  std::mt19937_64 rng(a.seed);
  AffineParams p = random_affine_params(a.translate, a.scale, rng);
  if (a.tx || a.ty || a.zoom) {
    p = AffineParams{};
    p.translate_x = a.tx.value_or(0.0);
    p.translate_y = a.ty.value_or(0.0);
    p.scale = a.zoom.value_or(1.0);
  }
  const auto in = load_labeled(a.io.image, a.io.labels, a.io.classes);
  const auto out = affine_augment(in, p);
  save_labeled(out, a.io.out_image, a.io.out_labels);
  std::cout << "translate " << format_fixed(p.translate_x, 6) << "," << format_fixed(p.translate_y, 6) << " scale "
            << format_fixed(p.scale, 6) << "; boxes " << in.boxes.size() << " -> " << out.boxes.size() << "\n";
  return kExitOk;
}

struct MosaicArgs {
  std::vector<std::string> images;
  std::vector<std::string> labels;
  std::string out_image;
  std::optional<std::string> out_labels;
  int canvas = 640;
  std::uint64_t seed = 0;
  std::optional<std::string> center;
  int classes = kGestureCount;
};

int run_mosaic(const MosaicArgs& a) {
  if (a.images.size() != 4) throw UsageError("--images expects exactly 4 paths");
  if (!a.labels.empty() && a.labels.size() != 4) throw UsageError("--labels expects exactly 4 paths");
  if (a.out_labels && a.labels.empty()) throw UsageError("--out-labels needs --labels");
  if (a.canvas < 2 || a.canvas % 2 != 0) throw UsageError("--canvas must be a positive even size");
  MosaicOptions opts;
  opts.canvas = a.canvas;
  opts.seed = a.seed;
  if (a.center) {
    const auto parts = split(*a.center, ',');
    if (parts.size() != 2) throw UsageError("--center expects x,y");
    const double x = parse_number(parts[0], "--center"), y = parse_number(parts[1], "--center");
    if (x != std::floor(x) || y != std::floor(y) || x < 0 || y < 0 || x > a.canvas || y > a.canvas) {
      throw UsageError("--center must be integer pixels inside the canvas");
    }
    opts.center = std::pair{static_cast<int>(x), static_cast<int>(y)};
  }

  std::vector<LabeledImage> inputs;
  for (std::size_t i = 0; i < 4; ++i) {
    inputs.push_back(load_labeled(a.images[i], a.labels.empty() ? std::nullopt : std::optional(a.labels[i]),
                                  a.classes));
  }
  const auto out = mosaic(inputs, opts);
  save_labeled(out, a.out_image, a.out_labels);
  std::size_t total = 0;
  for (const auto& s : inputs) total += s.boxes.size();
  std::cout << "canvas " << a.canvas << "; boxes " << total << " -> " << out.boxes.size() << "\n";
  return kExitOk;
}

// ---- comply -------------------------------------------------------------------------------------

struct ComplyArgs {
  std::string csv;
  std::string pair = "open,close";
  double fps = 30.0;
  int min_transitions = 4;
  int window = 3;
  double max_missing = 0.2;
  std::optional<std::string> out;
};

int run_comply(const ComplyArgs& a) {
  const auto parts = split(a.pair, ',');
  if (parts.size() != 2) throw UsageError("--pair expects first,second");
  ProtocolSpec spec;
  spec.first = parse_gesture(parts[0], "--pair");
  spec.second = parse_gesture(parts[1], "--pair");
  spec.fps = a.fps;
  spec.min_transitions = a.min_transitions;
  spec.window = a.window;
  spec.max_missing_fraction = a.max_missing;
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (a.min_transitions < 0) throw UsageError("--min-transitions must be non-negative");
  if (!(a.max_missing >= 0.0 && a.max_missing <= 1.0)) throw UsageError("--max-missing must lie in [0, 1]");

  const auto frames = parse_frame_csv(read_text_file(a.csv));
  const auto report = check_alternation(frames, spec);
  write_or_print(a.out, to_json(report, spec).dump(2) + "\n");
  if (a.out) {
    std::cout << (report.compliant ? "compliant" : "NOT compliant") << ": " << report.transitions
              << " transitions, " << format_fixed(report.tap_frequency, 3) << " taps/s over "
              << format_fixed(report.duration_seconds, 3) << " s\n";
    for (const auto& f : report.failures) std::cout << "  - " << f << "\n";
  }
  return report.compliant ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hand-gesture video quality control: blur scoring, dataset building, detection metrics, "
               "block verification, augmentation and protocol compliance."};
  app.name("handqc");
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  std::function<int()> action;

  // blur
  auto* blur = app.add_subcommand("blur", "Blur scoring");
  blur->require_subcommand(1, 1);
  BlurArgs blur_args;
  auto* blur_score_cmd = blur->add_subcommand("score", "Score PGM/PPM images (files or directories)");
  blur_score_cmd->add_option("inputs", blur_args.inputs, "Image files or directories")->required();
  blur_score_cmd->add_option("--out", blur_args.out, "CSV output (default: standard output)");
  blur_score_cmd->add_option("--thresholds", blur_args.thresholds, "Category thresholds low,high")
      ->capture_default_str();
  blur_score_cmd->add_flag("--std", blur_args.with_std, "Also report the standard deviation (sqrt of score)");
  blur_score_cmd->add_option("--histogram", blur_args.histogram, "Write a score histogram SVG");
  blur_score_cmd->add_option("--bins", blur_args.bins, "Histogram bins")->capture_default_str();
  blur_score_cmd->callback([&] { action = [&] { return run_blur(blur_args); }; });

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Dataset manifests and training configuration");
  dataset->require_subcommand(1, 1);
  DatasetBuildArgs ds;
  auto* ds_build = dataset->add_subcommand("build", "Score images, attach labels and build clean/mixed splits");
  ds_build->add_option("--images", ds.images, "Image directory")->required();
  ds_build->add_option("--labels", ds.labels, "Label directory (<stem>.txt per image)");
  ds_build->add_option("--name", ds.name, "Manifest name")->capture_default_str();
  ds_build->add_option("--thresholds", ds.thresholds, "Blur thresholds low,high")->capture_default_str();
  ds_build->add_option("--mix", ds.mix, "Target non-clear share of the mixed set, in [0,1) (default: all)");
  ds_build->add_option("--out", ds.out, "Manifest JSON output")->required();
  ds_build->add_option("--clean-out", ds.clean_out, "Clean-set manifest JSON");
  ds_build->add_option("--mixed-out", ds.mixed_out, "Mixed-set manifest JSON");
  ds_build->callback([&] { action = [&] { return run_dataset_build(ds); }; });
  std::string config_path;
  auto* ds_config = dataset->add_subcommand("config", "Validate and print a key=value training configuration");
  ds_config->add_option("file", config_path, "Configuration file")->required();
  ds_config->callback([&] { action = [&] { return run_dataset_config(config_path); }; });

  // eval
  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
  eval->add_option("--gt", ev.gt, "Ground-truth directory (class cx cy w h)")->required();
  eval->add_option("--pred", ev.pred, "Prediction directory (class conf cx cy w h)")->required();
  eval->add_option("--classes", ev.classes, "Comma-separated class names (default: the five gestures)");
  eval->add_option("--iou", ev.iou, "IoU thresholds a:b:step or a single value")->capture_default_str();
  eval->add_option("--conf", ev.conf, "Reference confidence for P/R/F1")->capture_default_str();
  eval->add_option("--out", ev.out, "Report JSON (default: standard output)");
  eval->add_option("--csv", ev.csv, "Results-table CSV");
  eval->add_option("--name", ev.name, "Model name for the CSV row")->capture_default_str();
  eval->add_option("--svg", ev.svg, "Per-class PR curves at IoU 0.5 as SVG");
  eval->callback([&] { action = [&] { return run_eval(ev); }; });

  // compare
  std::string cmp_base, cmp_other;
  std::optional<std::string> cmp_csv;
  auto* compare = app.add_subcommand("compare", "Per-metric drops between two report JSON files");
  compare->add_option("baseline", cmp_base, "Baseline report JSON")->required();
  compare->add_option("other", cmp_other, "Compared report JSON")->required();
  compare->add_option("--csv", cmp_csv, "Delta CSV output");
  compare->callback([&] { action = [&] { return run_compare(cmp_base, cmp_other, cmp_csv); }; });

  // blocks
  auto* blocks = app.add_subcommand("blocks", "Attention-block kernels");
  blocks->require_subcommand(1, 1);
  nn::BlockCheckOptions bc;
  auto* blocks_check = blocks->add_subcommand("check", "Finite-difference gradient verification table");
  blocks_check->add_option("--seed", bc.seed, "Random seed")->capture_default_str();
  blocks_check->add_option("--configs", bc.configs, "Random configurations per block")->capture_default_str();
  blocks_check->add_option("--max-tokens", bc.max_tokens, "Largest token count")->capture_default_str();
  blocks_check->add_option("--max-width", bc.max_width, "Largest model width")->capture_default_str();
  blocks_check->add_option("--max-channels", bc.max_channels, "Largest SE channel count")->capture_default_str();
  blocks_check->callback([&] { action = [&] { return run_blocks_check(bc); }; });
  std::string head_variant = "p5";
  int head_input = 640, head_classes = 5, head_anchors = 3;
  auto* blocks_heads = blocks->add_subcommand("heads", "Detection-head output shapes");
  blocks_heads->add_option("--variant", head_variant, "p5 or p6")->capture_default_str();
  blocks_heads->add_option("--input", head_input, "Square input size")->capture_default_str();
  blocks_heads->add_option("--classes", head_classes, "Number of classes")->capture_default_str();
  blocks_heads->add_option("--anchors", head_anchors, "Anchors per scale")->capture_default_str();
  blocks_heads->callback([&] {
    action = [&] { return run_blocks_heads(head_variant, head_input, head_classes, head_anchors); };
  });

  // augment
  auto* augment = app.add_subcommand("augment", "Preview geometric augmentations");
  augment->require_subcommand(1, 1);
  auto add_io = [](CLI::App* cmd, AugmentIo& io) {
    cmd->add_option("--image", io.image, "Input PGM/PPM")->required();
    cmd->add_option("--labels", io.labels, "Input labels (class cx cy w h)");
    cmd->add_option("--out-image", io.out_image, "Output PGM/PPM")->required();
    cmd->add_option("--out-labels", io.out_labels, "Output labels");
    cmd->add_option("--num-classes", io.classes, "Number of label classes")->capture_default_str();
  };
  AugmentIo flip_io;
  auto* aug_flip = augment->add_subcommand("flip", "Horizontal flip");
  add_io(aug_flip, flip_io);
  aug_flip->callback([&] {
    action = [&] {
      check_io(flip_io);
      const auto in = load_labeled(flip_io.image, flip_io.labels, flip_io.classes);
      save_labeled(flip_lr(in), flip_io.out_image, flip_io.out_labels);
      return kExitOk;
    };
  });
  AffineArgs af;
  auto* aug_affine = augment->add_subcommand("affine", "Random translate/scale (or explicit with --tx/--ty/--zoom)");
  add_io(aug_affine, af.io);
  aug_affine->add_option("--translate", af.translate, "Translation magnitude")->capture_default_str();
  aug_affine->add_option("--scale", af.scale, "Scale magnitude")->capture_default_str();
  aug_affine->add_option("--seed", af.seed, "Random seed")->capture_default_str();
  aug_affine->add_option("--tx", af.tx, "Explicit horizontal translation (normalized)");
  aug_affine->add_option("--ty", af.ty, "Explicit vertical translation (normalized)");
  aug_affine->add_option("--zoom", af.zoom, "Explicit scale factor about the centre");
  aug_affine->callback([&] { action = [&] { return run_affine(af); }; });
  MosaicArgs mo;
  auto* aug_mosaic = augment->add_subcommand("mosaic", "Four-image mosaic");
  aug_mosaic->add_option("--images", mo.images, "Four input images")->required()->expected(4);
  aug_mosaic->add_option("--labels", mo.labels, "Four label files")->expected(4);
  aug_mosaic->add_option("--out-image", mo.out_image, "Output PGM/PPM")->required();
  aug_mosaic->add_option("--out-labels", mo.out_labels, "Output labels");
  aug_mosaic->add_option("--canvas", mo.canvas, "Canvas size")->capture_default_str();
  aug_mosaic->add_option("--seed", mo.seed, "Random seed for the centre point")->capture_default_str();
  aug_mosaic->add_option("--center", mo.center, "Fixed centre x,y in pixels");
  aug_mosaic->add_option("--num-classes", mo.classes, "Number of label classes")->capture_default_str();
  aug_mosaic->callback([&] { action = [&] { return run_mosaic(mo); }; });

  // comply
  ComplyArgs co;
  auto* comply = app.add_subcommand("comply", "Audit a per-frame gesture sequence against a tapping protocol");
  comply->add_option("--csv", co.csv, "Per-frame CSV frame,gesture,confidence")->required();
  comply->add_option("--pair", co.pair, "Expected gestures first,second")->capture_default_str();
  comply->add_option("--fps", co.fps, "Frames per second")->capture_default_str();
  comply->add_option("--min-transitions", co.min_transitions, "Required transitions")->capture_default_str();
  comply->add_option("--window", co.window, "Odd smoothing window")->capture_default_str();
  comply->add_option("--max-missing", co.max_missing, "Tolerated no-detection fraction")->capture_default_str();
  comply->add_option("--out", co.out, "Report JSON (default: standard output)");
  comply->callback([&] { action = [&] { return run_comply(co); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}

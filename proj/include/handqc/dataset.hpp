#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "handqc/evaluation.hpp"
#include "handqc/imaging.hpp"

namespace handqc {

/// The five gestures of the hand-movement test; ids are stable and match label files.
enum class GestureClass : int { Open = 0, Close = 1, PinchOpen = 2, PinchClose = 3, Flip = 4 };

inline constexpr int kGestureCount = 5;
inline constexpr std::array<GestureClass, kGestureCount> kAllGestures{
    GestureClass::Open, GestureClass::Close, GestureClass::PinchOpen, GestureClass::PinchClose,
    GestureClass::Flip};

/// snake_case name: open, close, pinch_open, pinch_close, flip.
std::string_view to_string(GestureClass g) noexcept;
/// Accepts ids ("2"), snake_case, or display names ("Pinch Open"), case-insensitively.
std::optional<GestureClass> gesture_from_string(std::string_view s);
std::vector<std::string> gesture_names();

struct GestureBox {
  GestureClass gesture = GestureClass::Open;
  BBox box;

  bool operator==(const GestureBox&) const = default;
};

/// YOLO label text restricted to the five gestures.
std::vector<GestureBox> parse_annotation(std::string_view text);
std::string write_annotation(const std::vector<GestureBox>& boxes);

std::vector<GroundTruthBox> to_ground_truth(const std::vector<GestureBox>& boxes);
/// Throws InvalidInputError for class ids outside the gesture range.
std::vector<GestureBox> to_gesture_boxes(const std::vector<GroundTruthBox>& boxes);

struct AnnotatedImage {
  std::string path;
  int width = 0;
  int height = 0;
  std::vector<GestureBox> boxes;
  BlurRecord blur;
  std::optional<std::string> participant;
  std::optional<double> fps;
};

struct CategoryCounts {
  std::size_t clear = 0;
  std::size_t blurred = 0;
  std::size_t totally_blurred = 0;

  std::size_t total() const noexcept { return clear + blurred + totally_blurred; }
  bool operator==(const CategoryCounts&) const = default;
};

struct DatasetManifest {
  std::string name;
  std::vector<AnnotatedImage> entries;

  CategoryCounts counts() const noexcept;
  /// Paths unique, boxes valid, categories consistent with `t`.
  void validate(const BlurThresholds& t = {}) const;
};

nlohmann::json to_json(const DatasetManifest& m);
/// Rejects manifests whose stored counts disagree with their entries.
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Scores every PGM/PPM under `images` and attaches `<labels>/<stem>.txt` when present.
/// Entries are sorted by path.
DatasetManifest build_manifest(const std::filesystem::path& images,
                               const std::optional<std::filesystem::path>& labels,
                               const BlurThresholds& t, std::string name);

struct SplitResult {
  DatasetManifest clean;  // clear images only
  DatasetManifest mixed;  // clean plus selected non-clear images
  std::size_t requested_non_clear = 0;
  std::size_t achieved_non_clear = 0;
  /// Set when the requested mix could not be reached with the available images.
  std::optional<std::string> warning;

  double achieved_mix() const noexcept;
};

/// `non_clear_fraction` is the target share of non-clear images in the mixed set, in [0, 1);
/// nullopt takes every non-clear image. Selection is by ascending path.
SplitResult build_splits(const DatasetManifest& manifest,
                         std::optional<double> non_clear_fraction = std::nullopt);

}  // namespace handqc

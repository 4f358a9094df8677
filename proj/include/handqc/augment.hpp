#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "handqc/evaluation.hpp"
#include "handqc/imaging.hpp"

namespace handqc {

/// An image together with its normalized, class-labelled boxes.
struct LabeledImage {
  Raster image;
  std::vector<GroundTruthBox> boxes;
};

/// Value used for canvas pixels that no source pixel maps to.
inline constexpr std::uint8_t kPadValue = 114;

/// Boxes narrower or shorter than this many pixels after clipping are dropped.
inline constexpr double kMinBoxPixels = 2.0;

/// Horizontal mirror; box centres map cx -> 1 - cx.
LabeledImage flip_lr(const LabeledImage& in);

/// x' = pivot + scale * (x - pivot) + translate, in normalized coordinates, on both axes.
struct AffineParams {
  double translate_x = 0.0;
  double translate_y = 0.0;
  double scale = 1.0;
  double pivot_x = 0.5;
  double pivot_y = 0.5;
};

/// Nearest-neighbour resampling onto a canvas of the same size; boxes are mapped, clipped to
/// the canvas and dropped when they fall below kMinBoxPixels. Throws ConfigError for scale <= 0.
LabeledImage affine_augment(const LabeledImage& in, const AffineParams& p);

/// Draws translate uniformly in [-translate, translate] and scale in [1 - scale, 1 + scale]
/// about the image centre.
AffineParams random_affine_params(double translate, double scale, std::mt19937_64& rng);

struct MosaicOptions {
  int canvas = 640;
  std::uint64_t seed = 0;
  /// Overrides the sampled centre (pixels); otherwise drawn uniformly in [canvas/4, 3*canvas/4].
  std::optional<std::pair<int, int>> center;
};

/// Four-image mosaic around a seeded centre point: images keep their native size and meet at the
/// centre (top-left, top-right, bottom-left, bottom-right), cropped by the canvas border.
/// Throws InvalidInputError unless exactly four inputs share a channel count, ConfigError for
/// an odd or non-positive canvas.
LabeledImage mosaic(std::span<const LabeledImage> inputs, const MosaicOptions& opts);

}  // namespace handqc

#include "handqc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "handqc/error.hpp"

namespace handqc {
namespace {

// Clip a pixel-space box to [0, w] x [0, h] and normalize; nullopt when too small to keep.
std::optional<BBox> clip_to_canvas(CornerBox px, int w, int h) {
  px.x1 = std::clamp(px.x1, 0.0, static_cast<double>(w));
  px.x2 = std::clamp(px.x2, 0.0, static_cast<double>(w));
  px.y1 = std::clamp(px.y1, 0.0, static_cast<double>(h));
  px.y2 = std::clamp(px.y2, 0.0, static_cast<double>(h));
  if (px.x2 - px.x1 < kMinBoxPixels || px.y2 - px.y1 < kMinBoxPixels) return std::nullopt;
  const CornerBox unit{px.x1 / w, px.y1 / h, px.x2 / w, px.y2 / h};
  BBox b = BBox::from_corners(unit);
  b.w = std::min(b.w, 1.0);
  b.h = std::min(b.h, 1.0);
  return b;
}

}  // namespace

LabeledImage flip_lr(const LabeledImage& in) {
  LabeledImage out{in.image, in.boxes};
  const Raster& src = in.image;
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      for (int c = 0; c < src.channels; ++c) out.image.at(x, y, c) = src.at(src.width - 1 - x, y, c);
    }
  }
  for (auto& b : out.boxes) b.box.cx = 1.0 - b.box.cx;
  return out;
}

LabeledImage affine_augment(const LabeledImage& in, const AffineParams& p) {
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) {
    throw ConfigError("affine scale must be positive, got " + std::to_string(p.scale));
  }
  const Raster& src = in.image;
  const int w = src.width, h = src.height;
  LabeledImage out{Raster(w, h, src.channels, kPadValue), {}};

  // Inverse map from each destination pixel centre back into the source.
  for (int y = 0; y < h; ++y) {
    const double yn = (y + 0.5) / h;
    const double ys = p.pivot_y + (yn - p.translate_y - p.pivot_y) / p.scale;
    const auto sy = static_cast<long>(std::floor(ys * h));
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      const double xn = (x + 0.5) / w;
      const double xs = p.pivot_x + (xn - p.translate_x - p.pivot_x) / p.scale;
      const auto sx = static_cast<long>(std::floor(xs * w));
      if (sx < 0 || sx >= w) continue;
      for (int c = 0; c < src.channels; ++c) {
        out.image.at(x, y, c) = src.at(static_cast<int>(sx), static_cast<int>(sy), c);
      }
    }
  }

  auto fx = [&](double x) { return (p.pivot_x + p.scale * (x - p.pivot_x) + p.translate_x) * w; };
  auto fy = [&](double y) { return (p.pivot_y + p.scale * (y - p.pivot_y) + p.translate_y) * h; };
  for (const auto& b : in.boxes) {
    const CornerBox c = b.box.corners();
    if (auto mapped = clip_to_canvas({fx(c.x1), fy(c.y1), fx(c.x2), fy(c.y2)}, w, h)) {
      out.boxes.push_back({b.class_id, *mapped});
    }
  }
  return out;
}

AffineParams random_affine_params(double translate, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(-translate, translate);
  std::uniform_real_distribution<double> s(1.0 - scale, 1.0 + scale);
  AffineParams p;
  p.translate_x = t(rng);
  p.translate_y = t(rng);
  p.scale = s(rng);
  return p;
}

LabeledImage mosaic(std::span<const LabeledImage> inputs, const MosaicOptions& opts) {
  if (inputs.size() != 4) {
    throw InvalidInputError("mosaic needs exactly four inputs, got " + std::to_string(inputs.size()));
  }
  const int s = opts.canvas;
  if (s <= 0 || s % 2 != 0) throw ConfigError("mosaic canvas must be a positive even size");
  const int channels = inputs[0].image.channels;
  for (const auto& in : inputs) {
    if (in.image.channels != channels) throw InvalidInputError("mosaic inputs differ in channel count");
  }

  int xc = 0, yc = 0;
  if (opts.center) {
    std::tie(xc, yc) = *opts.center;
    if (xc < 0 || xc > s || yc < 0 || yc > s) throw ConfigError("mosaic centre outside the canvas");
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<int> dist(s / 4, 3 * s / 4);
    xc = dist(rng);
    yc = dist(rng);
  }

  LabeledImage out{Raster(s, s, channels, kPadValue), {}};
  for (std::size_t i = 0; i < 4; ++i) {
    const Raster& src = inputs[i].image;
    const bool left = i % 2 == 0;
    const bool top = i < 2;
    // Canvas position of the source's top-left pixel.
    const int ox = left ? xc - src.width : xc;
    const int oy = top ? yc - src.height : yc;

    const int x0 = std::max(ox, 0), x1 = std::min(ox + src.width, s);
    const int y0 = std::max(oy, 0), y1 = std::min(oy + src.height, s);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        for (int c = 0; c < channels; ++c) out.image.at(x, y, c) = src.at(x - ox, y - oy, c);
      }
    }

    for (const auto& b : inputs[i].boxes) {
      const CornerBox c = b.box.corners();
      const CornerBox px{c.x1 * src.width + ox, c.y1 * src.height + oy, c.x2 * src.width + ox,
                         c.y2 * src.height + oy};
      if (auto mapped = clip_to_canvas(px, s, s)) out.boxes.push_back({b.class_id, *mapped});
    }
  }
  return out;
}

}  // namespace handqc

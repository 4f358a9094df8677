#include "handqc/imaging.hpp"

#include <algorithm>
#include <string>

#include "handqc/error.hpp"

namespace handqc {

Raster::Raster(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
  if (w < 1 || h < 1 || (c != 1 && c != 3)) {
    throw InvalidInputError("raster must be at least 1x1 with 1 or 3 channels, got " +
                            std::to_string(w) + "x" + std::to_string(h) + "x" + std::to_string(c));
  }
  pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

GrayImage::GrayImage(ImageArray<double> values) : values_(std::move(values)) {
  if (values_.size() == 0) throw InvalidInputError("gray image has zero pixels");
  if (!values_.allFinite() || values_.minCoeff() < 0.0 || values_.maxCoeff() > 255.0) {
    throw InvalidInputError("gray image intensities must lie in [0, 255]");
  }
}

GrayImage GrayImage::constant(int width, int height, double value) {
  if (width < 1 || height < 1) throw InvalidInputError("gray image has zero pixels");
  return GrayImage(ImageArray<double>::Constant(height, width, value));
}

std::string_view to_string(BlurCategory c) noexcept {
  switch (c) {
    case BlurCategory::Clear: return "clear";
    case BlurCategory::Blurred: return "blurred";
    case BlurCategory::TotallyBlurred: return "totally_blurred";
  }
  return "unknown";
}

BlurCategory blur_category_from_string(std::string_view s) {
  if (s == "clear") return BlurCategory::Clear;
  if (s == "blurred") return BlurCategory::Blurred;
  if (s == "totally_blurred") return BlurCategory::TotallyBlurred;
  throw ParseError("unknown blur category '" + std::string(s) + "'");
}

void BlurThresholds::validate() const {
  if (!(low > 0.0 && low < high)) {
    throw ConfigError("blur thresholds need 0 < low < high, got low=" + std::to_string(low) +
                      " high=" + std::to_string(high));
  }
}

GrayImage to_grayscale(const Raster& image) {
  if (image.width < 1 || image.height < 1 || image.pixels.empty()) {
    throw InvalidInputError("cannot convert a zero-dimension image");
  }
  const auto expected = static_cast<std::size_t>(image.width) * image.height * image.channels;
  if (image.pixels.size() != expected) throw InvalidInputError("raster buffer size mismatch");

  ImageArray<double> out(image.height, image.width);
  if (image.channels == 1) {
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) out(y, x) = image.at(x, y, 0);
  } else if (image.channels == 3) {
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        out(y, x) = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) +
                    0.114 * image.at(x, y, 2);
      }
    }
    // Weights sum to 1 but rounding can overshoot 255 by an ulp.
    out = out.min(255.0);
  } else {
    throw InvalidInputError("expected 1 or 3 channels, got " + std::to_string(image.channels));
  }
  return GrayImage(std::move(out));
}

ImageArray<double> laplacian_response(const GrayImage& img) {
  const Eigen::Index h = img.height(), w = img.width();
  if (h < 3 || w < 3) {
    throw InvalidInputError("Laplacian needs an image of at least 3x3, got " + std::to_string(w) +
                            "x" + std::to_string(h));
  }
  const auto& v = img.values();
  const Eigen::Index rh = h - 2, rw = w - 2;
  return v.block(0, 1, rh, rw) + v.block(2, 1, rh, rw) + v.block(1, 0, rh, rw) +
         v.block(1, 2, rh, rw) - 4.0 * v.block(1, 1, rh, rw);
}

double blur_score(const GrayImage& img) {
  const ImageArray<double> r = laplacian_response(img);
  const double mean = r.mean();
  return (r - mean).square().mean();
}

BlurCategory categorize(double score, const BlurThresholds& t) {
  if (score > t.high) return BlurCategory::Clear;
  if (score < t.low) return BlurCategory::TotallyBlurred;
  return BlurCategory::Blurred;
}

BlurRecord assess_blur(const GrayImage& img, const BlurThresholds& t) {
  const double s = blur_score(img);
  return {s, categorize(s, t)};
}

GrayImage box_blur(const GrayImage& img) {
  const int h = img.height(), w = img.width();
  ImageArray<double> out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          sum += img(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
        }
      }
      out(y, x) = std::min(sum / 9.0, 255.0);
    }
  }
  return GrayImage(std::move(out));
}

}  // namespace handqc

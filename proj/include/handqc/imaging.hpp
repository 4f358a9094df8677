#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace handqc {

/// Row-major dense array of real intensities; rows index y, columns index x.
template <typename Scalar>
using ImageArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved 8-bit raster with 1 (gray) or 3 (RGB) channels.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h, int c, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) { return pixels[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[index(x, y, c)]; }

  bool operator==(const Raster&) const = default;

private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
};

/// Single-channel real image with every value in [0, 255].
class GrayImage {
public:
  /// Throws InvalidInputError on an empty array or out-of-range values.
  explicit GrayImage(ImageArray<double> values);
  static GrayImage constant(int width, int height, double value);

  int width() const noexcept { return static_cast<int>(values_.cols()); }
  int height() const noexcept { return static_cast<int>(values_.rows()); }
  const ImageArray<double>& values() const noexcept { return values_; }
  double operator()(int x, int y) const { return values_(y, x); }

private:
  ImageArray<double> values_;
};

enum class BlurCategory { Clear, Blurred, TotallyBlurred };

std::string_view to_string(BlurCategory c) noexcept;
/// Accepts the names produced by to_string; throws ParseError otherwise.
BlurCategory blur_category_from_string(std::string_view s);

struct BlurThresholds {
  double low = 10.0;
  double high = 50.0;

  /// Throws ConfigError unless 0 < low < high.
  void validate() const;
};

struct BlurRecord {
  double score = 0.0;
  BlurCategory category = BlurCategory::TotallyBlurred;
};

/// BT.601 luma. Single-channel rasters pass through unchanged.
GrayImage to_grayscale(const Raster& image);

/// Valid-region response of the 4-neighbour Laplace mask [[0,1,0],[1,-4,1],[0,1,0]];
/// the result is (height-2) x (width-2).
ImageArray<double> laplacian_response(const GrayImage& img);

/// Population variance of the valid Laplacian responses ("Fuzzy" score).
double blur_score(const GrayImage& img);

/// Clear above `high`, TotallyBlurred below `low`, Blurred otherwise (boundaries inclusive).
BlurCategory categorize(double score, const BlurThresholds& t = {});

BlurRecord assess_blur(const GrayImage& img, const BlurThresholds& t = {});

/// 3x3 mean filter with replicated borders; output has the input's size.
GrayImage box_blur(const GrayImage& img);

}  // namespace handqc

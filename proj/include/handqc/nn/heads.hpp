#pragma once

#include <vector>

namespace handqc::nn {

enum class HeadVariant { P5, P6 };

/// Multi-scale detection head: P5 predicts at strides 8/16/32, P6 adds stride 64.
struct HeadConfig {
  HeadVariant variant = HeadVariant::P5;
  int anchors_per_scale = 3;
  int num_classes = 5;

  std::vector<int> strides() const;
};

struct HeadShape {
  int stride = 0;
  int grid_h = 0;
  int grid_w = 0;
  int channels = 0;  // anchors * (5 + classes)

  bool operator==(const HeadShape&) const = default;
};

/// One output map per stride for a square input. Throws ConfigError when the input is not
/// divisible by every stride or the counts are non-positive.
std::vector<HeadShape> head_shapes(const HeadConfig& cfg, int input_size);

}  // namespace handqc::nn

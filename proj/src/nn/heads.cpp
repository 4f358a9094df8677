#include "handqc/nn/heads.hpp"

#include <string>

#include "handqc/error.hpp"

namespace handqc::nn {

std::vector<int> HeadConfig::strides() const {
  if (variant == HeadVariant::P6) return {8, 16, 32, 64};
  return {8, 16, 32};
}

std::vector<HeadShape> head_shapes(const HeadConfig& cfg, int input_size) {
  if (cfg.anchors_per_scale < 1 || cfg.num_classes < 1) {
    throw ConfigError("head needs at least one anchor and one class");
  }
  if (input_size < 1) throw ConfigError("input size must be positive");
  std::vector<HeadShape> out;
  const int channels = cfg.anchors_per_scale * (5 + cfg.num_classes);
  for (const int s : cfg.strides()) {
    if (input_size % s != 0) {
      throw ConfigError("input size " + std::to_string(input_size) + " is not divisible by stride " +
                        std::to_string(s));
    }
    out.push_back({s, input_size / s, input_size / s, channels});
  }
  return out;
}

}  // namespace handqc::nn

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace handqc {

/// Detector training hyperparameters. Augmentation entries are magnitudes (translate, scale)
/// or probabilities (fliplr, mosaic); zero disables the augmentation.
struct TrainConfig {
  int epochs = 50;
  int batch = 32;
  int imgsz = 640;
  double lr0 = 0.01;
  std::string optimizer = "SGD";
  bool warmup = true;
  double translate = 0.1;
  double scale = 0.5;
  double fliplr = 0.5;
  double mosaic = 1.0;

  bool operator==(const TrainConfig&) const = default;
};

/// Parses `key=value` lines ('#' comments and blank lines allowed) over the defaults.
/// Unknown keys, duplicate keys and malformed values raise ParseError naming the key.
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::filesystem::path& path);

std::string format_train_config(const TrainConfig& cfg);

}  // namespace handqc

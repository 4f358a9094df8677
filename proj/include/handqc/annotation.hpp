#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "handqc/evaluation.hpp"

namespace handqc {

/// Ground-truth label text: one `class_id cx cy w h` line per box (normalized, space-separated).
/// Blank lines are skipped. Throws ParseError carrying the offending line number.
std::vector<GroundTruthBox> parse_ground_truth(std::string_view text, int num_classes);

/// Prediction text: one `class_id confidence cx cy w h` line per detection.
std::vector<Detection> parse_predictions(std::string_view text, int num_classes);

/// Writes boxes at 6 decimals, the precision parse_ground_truth round-trips.
std::string format_ground_truth(const std::vector<GroundTruthBox>& boxes);
std::string format_predictions(const std::vector<Detection>& dets);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Loads every `*.txt` in `dir`, keyed by file stem.
ImageGroundTruth load_ground_truth_dir(const std::filesystem::path& dir, int num_classes);
ImageDetections load_prediction_dir(const std::filesystem::path& dir, int num_classes);

}  // namespace handqc

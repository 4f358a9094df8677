#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "handqc/dataset.hpp"

namespace handqc {

struct FrameLabel {
  int frame = 0;
  std::optional<GestureClass> gesture;  // nullopt: nothing detected
  double confidence = 0.0;

  bool operator==(const FrameLabel&) const = default;
};

/// What the participant was asked to do: alternate between `first` and `second`.
struct ProtocolSpec {
  GestureClass first = GestureClass::Open;
  GestureClass second = GestureClass::Close;
  double fps = 30.0;
  int min_transitions = 4;
  int window = 3;
  double max_missing_fraction = 0.2;

  /// Throws ConfigError on identical gestures, fps <= 0 or an even/non-positive window.
  void validate() const;
};

struct ComplianceReport {
  bool compliant = false;
  int frame_count = 0;
  int run_count = 0;
  int transitions = 0;
  double duration_seconds = 0.0;
  double tap_frequency = 0.0;  // taps per second, one tap = two transitions
  bool strictly_alternating = false;
  double no_detection_fraction = 0.0;
  std::map<GestureClass, int> unexpected;  // frame counts of gestures outside the pair
  std::vector<std::string> failures;       // human-readable reasons when not compliant
};

/// Majority vote over the centred window of odd size k (truncated at the ends);
/// a tie for the most frequent label keeps the frame's own label.
std::vector<FrameLabel> smooth_sequence(std::span<const FrameLabel> frames, int k);

/// Smooths, drops undetected frames, collapses runs and audits them against the protocol.
/// Throws InvalidInputError when frame indices are not strictly increasing.
ComplianceReport check_alternation(std::span<const FrameLabel> frames, const ProtocolSpec& spec);

/// CSV `frame,gesture,confidence`; a header line is optional, gesture may be a name or id
/// and is empty (or "none") when nothing was detected.
std::vector<FrameLabel> parse_frame_csv(std::string_view text);

nlohmann::json to_json(const ComplianceReport& r, const ProtocolSpec& spec);

}  // namespace handqc

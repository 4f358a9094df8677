#include "handqc/compliance.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "handqc/error.hpp"

namespace handqc {

void ProtocolSpec::validate() const {
  if (first == second) throw ConfigError("protocol gestures must differ");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("fps must be positive");
  if (window < 1 || window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 1");
  if (min_transitions < 0) throw ConfigError("minimum transitions must be non-negative");
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction <= 1.0)) {
    throw ConfigError("no-detection tolerance must lie in [0, 1]");
  }
}

std::vector<FrameLabel> smooth_sequence(std::span<const FrameLabel> frames, int k) {
  if (k < 1 || k % 2 == 0) throw ConfigError("smoothing window must be odd and >= 1");
  std::vector<FrameLabel> out(frames.begin(), frames.end());
  const auto n = static_cast<std::ptrdiff_t>(frames.size());
  const std::ptrdiff_t half = k / 2;

  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // Labels are nullopt or one of five gestures: slot 0 is "none".
    std::array<int, kGestureCount + 1> votes{};
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - half); j <= std::min(n - 1, i + half); ++j) {
      const auto& g = frames[static_cast<std::size_t>(j)].gesture;
      ++votes[g ? static_cast<std::size_t>(*g) + 1 : 0];
    }
    const auto top = std::max_element(votes.begin(), votes.end());
    if (std::count(votes.begin(), votes.end(), *top) > 1) continue;
    const auto slot = top - votes.begin();
    out[static_cast<std::size_t>(i)].gesture =
        slot == 0 ? std::nullopt : std::optional(static_cast<GestureClass>(slot - 1));
  }
  return out;
}

ComplianceReport check_alternation(std::span<const FrameLabel> frames, const ProtocolSpec& spec) {
  spec.validate();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame <= frames[i - 1].frame) {
      throw InvalidInputError("frame indices must be strictly increasing (frame " +
                              std::to_string(frames[i].frame) + ")");
    }
  }

  const auto smoothed = smooth_sequence(frames, spec.window);
  ComplianceReport r;
  r.frame_count = static_cast<int>(smoothed.size());
  r.duration_seconds = r.frame_count / spec.fps;

  int missing = 0;
  std::vector<GestureClass> runs;
  for (const auto& f : smoothed) {
    if (!f.gesture) {
      ++missing;
      continue;
    }
    if (*f.gesture != spec.first && *f.gesture != spec.second) ++r.unexpected[*f.gesture];
    if (runs.empty() || runs.back() != *f.gesture) runs.push_back(*f.gesture);
  }
  r.run_count = static_cast<int>(runs.size());
  r.no_detection_fraction = r.frame_count > 0 ? static_cast<double>(missing) / r.frame_count : 0.0;

  auto in_pair = [&](GestureClass g) { return g == spec.first || g == spec.second; };
  r.strictly_alternating = !runs.empty();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!in_pair(runs[i])) r.strictly_alternating = false;
    if (i > 0 && in_pair(runs[i]) && in_pair(runs[i - 1])) ++r.transitions;
  }
  r.tap_frequency = r.duration_seconds > 0.0 ? r.transitions / (2.0 * r.duration_seconds) : 0.0;

  if (!r.unexpected.empty()) r.failures.push_back("unexpected gestures present");
  if (!r.strictly_alternating) r.failures.push_back("gesture runs do not alternate between the pair");
  if (r.transitions < spec.min_transitions) {
    r.failures.push_back("only " + std::to_string(r.transitions) + " transitions, need " +
                         std::to_string(spec.min_transitions));
  }
  if (r.no_detection_fraction > spec.max_missing_fraction) {
    r.failures.push_back("too many frames without a detection");
  }
  r.compliant = r.failures.empty();
  return r;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<FrameLabel> parse_frame_csv(std::string_view text) {
  std::vector<FrameLabel> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line =
        trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;

    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string_view::npos; start = comma + 1) {
      cols.push_back(trim(line.substr(start, comma - start)));
    }
    cols.push_back(trim(line.substr(start)));
    if (line_no == 1 && cols[0] == "frame") continue;
    if (cols.size() < 2 || cols.size() > 3) throw ParseError("expected frame,gesture,confidence", line_no);

    FrameLabel f;
    const auto [ptr, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), f.frame);
    if (ec != std::errc{} || ptr != cols[0].data() + cols[0].size()) {
      throw ParseError("malformed frame index '" + std::string(cols[0]) + "'", line_no);
    }
    if (!cols[1].empty() && cols[1] != "none") {
      f.gesture = gesture_from_string(cols[1]);
      if (!f.gesture) throw ParseError("unknown gesture '" + std::string(cols[1]) + "'", line_no);
    }
    if (cols.size() == 3 && !cols[2].empty()) {
      const auto [p2, e2] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), f.confidence);
      if (e2 != std::errc{} || p2 != cols[2].data() + cols[2].size() || f.confidence < 0.0 ||
          f.confidence > 1.0) {
        throw ParseError("confidence must be a number in [0,1]", line_no);
      }
    }
    out.push_back(f);
  }
  return out;
}

nlohmann::json to_json(const ComplianceReport& r, const ProtocolSpec& spec) {
  nlohmann::json unexpected = nlohmann::json::object();
  for (const auto& [g, n] : r.unexpected) unexpected[std::string(to_string(g))] = n;
  return {{"compliant", r.compliant},
          {"expected_pair", {std::string(to_string(spec.first)), std::string(to_string(spec.second))}},
          {"fps", spec.fps},
          {"frames", r.frame_count},
          {"duration_seconds", r.duration_seconds},
          {"runs", r.run_count},
          {"transitions", r.transitions},
          {"min_transitions", spec.min_transitions},
          {"tap_frequency", r.tap_frequency},
          {"strictly_alternating", r.strictly_alternating},
          {"no_detection_fraction", r.no_detection_fraction},
          {"unexpected_gestures", unexpected},
          {"failures", r.failures}};
}

}  // namespace handqc

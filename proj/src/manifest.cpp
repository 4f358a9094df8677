#include "handqc/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "handqc/annotation.hpp"
#include "handqc/error.hpp"
#include "handqc/pnm.hpp"

namespace handqc {

std::string_view to_string(GestureClass g) noexcept {
  switch (g) {
    case GestureClass::Open: return "open";
    case GestureClass::Close: return "close";
    case GestureClass::PinchOpen: return "pinch_open";
    case GestureClass::PinchClose: return "pinch_close";
    case GestureClass::Flip: return "flip";
  }
  return "unknown";
}

std::optional<GestureClass> gesture_from_string(std::string_view s) {
  std::string key;
  for (const char ch : s) {
    if (ch == ' ' || ch == '-' || ch == '_') {
      key += '_';
    } else {
      key += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  if (key.size() == 1 && key[0] >= '0' && key[0] < '0' + kGestureCount) {
    return static_cast<GestureClass>(key[0] - '0');
  }
  for (const auto g : kAllGestures) {
    if (key == to_string(g)) return g;
  }
  return std::nullopt;
}

std::vector<std::string> gesture_names() {
  std::vector<std::string> out;
  for (const auto g : kAllGestures) out.emplace_back(to_string(g));
  return out;
}

std::vector<GroundTruthBox> to_ground_truth(const std::vector<GestureBox>& boxes) {
  std::vector<GroundTruthBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back({static_cast<int>(b.gesture), b.box});
  return out;
}

std::vector<GestureBox> to_gesture_boxes(const std::vector<GroundTruthBox>& boxes) {
  std::vector<GestureBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    if (b.class_id < 0 || b.class_id >= kGestureCount) {
      throw InvalidInputError("class " + std::to_string(b.class_id) + " of " +
                              std::to_string(kGestureCount));
    }
    out.push_back({static_cast<GestureClass>(b.class_id), b.box});
  }
  return out;
}

std::vector<GestureBox> parse_annotation(std::string_view text) {
  return to_gesture_boxes(parse_ground_truth(text, kGestureCount));
}

std::string write_annotation(const std::vector<GestureBox>& boxes) {
  return format_ground_truth(to_ground_truth(boxes));
}

CategoryCounts DatasetManifest::counts() const noexcept {
  CategoryCounts c;
  for (const auto& e : entries) {
    switch (e.blur.category) {
      case BlurCategory::Clear: ++c.clear; break;
      case BlurCategory::Blurred: ++c.blurred; break;
      case BlurCategory::TotallyBlurred: ++c.totally_blurred; break;
    }
  }
  return c;
}

void DatasetManifest::validate(const BlurThresholds& t) const {
  std::set<std::string_view> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.path).second) throw InvalidInputError("duplicate manifest path " + e.path);
    if (!(e.blur.score >= 0.0)) throw InvalidInputError(e.path + ": negative blur score");
    if (categorize(e.blur.score, t) != e.blur.category) {
      throw InvalidInputError(e.path + ": blur category inconsistent with score");
    }
    for (const auto& b : e.boxes) {
      if (!b.box.is_valid()) throw InvalidInputError(e.path + ": invalid box");
    }
  }
}

namespace {

nlohmann::json counts_json(const CategoryCounts& c) {
  return {{"clear", c.clear},
          {"blurred", c.blurred},
          {"totally_blurred", c.totally_blurred},
          {"total", c.total()}};
}

}  // namespace

nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : e.boxes) {
      boxes.push_back({{"class_id", static_cast<int>(b.gesture)},
                       {"cx", b.box.cx},
                       {"cy", b.box.cy},
                       {"w", b.box.w},
                       {"h", b.box.h}});
    }
    entries.push_back({{"path", e.path},
                       {"width", e.width},
                       {"height", e.height},
                       {"blur_score", e.blur.score},
                       {"blur_category", std::string(to_string(e.blur.category))},
                       {"boxes", boxes},
                       {"participant", e.participant ? nlohmann::json(*e.participant) : nullptr},
                       {"fps", e.fps ? nlohmann::json(*e.fps) : nullptr}});
  }
  return {{"name", m.name}, {"entries", entries}, {"counts", counts_json(m.counts())}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    for (const auto& je : j.at("entries")) {
      AnnotatedImage e;
      e.path = je.at("path").get<std::string>();
      e.width = je.at("width").get<int>();
      e.height = je.at("height").get<int>();
      e.blur.score = je.at("blur_score").get<double>();
      e.blur.category = blur_category_from_string(je.at("blur_category").get<std::string>());
      for (const auto& jb : je.at("boxes")) {
        const int cls = jb.at("class_id").get<int>();
        if (cls < 0 || cls >= kGestureCount) {
          throw ParseError(e.path + ": class " + std::to_string(cls) + " of " +
                           std::to_string(kGestureCount));
        }
        e.boxes.push_back({static_cast<GestureClass>(cls),
                           {jb.at("cx").get<double>(), jb.at("cy").get<double>(),
                            jb.at("w").get<double>(), jb.at("h").get<double>()}});
      }
      if (je.contains("participant") && !je["participant"].is_null()) {
        e.participant = je["participant"].get<std::string>();
      }
      if (je.contains("fps") && !je["fps"].is_null()) e.fps = je["fps"].get<double>();
      m.entries.push_back(std::move(e));
    }
    if (j.contains("counts")) {
      const auto& jc = j["counts"];
      const CategoryCounts stored{jc.at("clear").get<std::size_t>(), jc.at("blurred").get<std::size_t>(),
                                  jc.at("totally_blurred").get<std::size_t>()};
      if (stored != m.counts()) throw ParseError("manifest counts disagree with its entries");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid manifest JSON: ") + e.what());
  }
  std::set<std::string_view> seen;
  for (const auto& e : m.entries) {
    if (!seen.insert(e.path).second) throw ParseError("duplicate manifest path " + e.path);
  }
  return m;
}

DatasetManifest build_manifest(const std::filesystem::path& images,
                               const std::optional<std::filesystem::path>& labels,
                               const BlurThresholds& t, std::string name) {
  namespace fs = std::filesystem;
  t.validate();
  if (!fs::is_directory(images)) throw InvalidInputError("not a directory: " + images.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.is_regular_file() && has_pnm_extension(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  DatasetManifest m;
  m.name = std::move(name);
  for (const auto& file : files) {
    const Raster raster = read_pnm(file);
    AnnotatedImage e;
    e.path = file.string();
    e.width = raster.width;
    e.height = raster.height;
    e.blur = assess_blur(to_grayscale(raster), t);
    if (labels) {
      const fs::path label = *labels / (file.stem().string() + ".txt");
      if (fs::exists(label)) {
        try {
          e.boxes = parse_annotation(read_text_file(label));
        } catch (const ParseError& err) {
          throw ParseError(label.string() + ": " + err.what());
        }
      }
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

double SplitResult::achieved_mix() const noexcept {
  return mixed.entries.empty()
             ? 0.0
             : static_cast<double>(achieved_non_clear) / static_cast<double>(mixed.entries.size());
}

SplitResult build_splits(const DatasetManifest& manifest, std::optional<double> non_clear_fraction) {
  if (non_clear_fraction && !(*non_clear_fraction >= 0.0 && *non_clear_fraction < 1.0)) {
    throw ConfigError("non-clear fraction must lie in [0, 1)");
  }
  std::vector<const AnnotatedImage*> clear, noisy;
  for (const auto& e : manifest.entries) {
    (e.blur.category == BlurCategory::Clear ? clear : noisy).push_back(&e);
  }
  auto by_path = [](const AnnotatedImage* a, const AnnotatedImage* b) { return a->path < b->path; };
  std::sort(clear.begin(), clear.end(), by_path);
  std::sort(noisy.begin(), noisy.end(), by_path);

  SplitResult out;
  out.clean.name = manifest.name + "-clean";
  out.mixed.name = manifest.name + "-mixed";
  for (const auto* e : clear) out.clean.entries.push_back(*e);

  if (non_clear_fraction) {
    const double f = *non_clear_fraction;
    out.requested_non_clear =
        static_cast<std::size_t>(std::llround(f * static_cast<double>(clear.size()) / (1.0 - f)));
  } else {
    out.requested_non_clear = noisy.size();
  }
  out.achieved_non_clear = std::min(out.requested_non_clear, noisy.size());
  if (out.achieved_non_clear < out.requested_non_clear) {
    out.warning = "requested " + std::to_string(out.requested_non_clear) +
                  " non-clear images but only " + std::to_string(noisy.size()) +
                  " are available; using all of them";
  }

  out.mixed.entries = out.clean.entries;
  std::vector<const AnnotatedImage*> picked(noisy.begin(),
                                            noisy.begin() + static_cast<std::ptrdiff_t>(out.achieved_non_clear));
  for (const auto* e : picked) out.mixed.entries.push_back(*e);
  std::sort(out.mixed.entries.begin(), out.mixed.entries.end(),
            [](const AnnotatedImage& a, const AnnotatedImage& b) { return a.path < b.path; });
  return out;
}

}  // namespace handqc

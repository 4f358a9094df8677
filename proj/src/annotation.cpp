#include "handqc/annotation.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <span>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "handqc/error.hpp"

namespace handqc {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double to_double(std::string_view s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("malformed number '" + std::string(s) + "'", line);
  }
  return v;
}

int to_class(std::string_view s, int num_classes, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("malformed class id '" + std::string(s) + "'", line);
  }
  if (v < 0 || v >= num_classes) {
    throw ParseError("class " + std::to_string(v) + " of " + std::to_string(num_classes), line);
  }
  return v;
}

BBox to_box(std::span<const std::string_view> f, int line) {
  const BBox box{to_double(f[0], line), to_double(f[1], line), to_double(f[2], line),
                 to_double(f[3], line)};
  if (!box.is_valid()) throw ParseError("box coordinates outside [0,1]", line);
  return box;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    ++line_no;
    const auto fields = split_fields(line);
    if (!fields.empty()) fn(fields, line_no);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

void append_box(std::string& out, const BBox& b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " %.6f %.6f %.6f %.6f\n", b.cx, b.cy, b.w, b.h);
  out += buf;
}

}  // namespace

std::vector<GroundTruthBox> parse_ground_truth(std::string_view text, int num_classes) {
  std::vector<GroundTruthBox> out;
  for_each_line(text, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() != 5) {
      throw ParseError("expected 5 fields (class cx cy w h), got " + std::to_string(f.size()), line);
    }
    out.push_back({to_class(f[0], num_classes, line), to_box(std::span(f).subspan(1), line)});
  });
  return out;
}

std::vector<Detection> parse_predictions(std::string_view text, int num_classes) {
  std::vector<Detection> out;
  for_each_line(text, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() != 6) {
      throw ParseError("expected 6 fields (class confidence cx cy w h), got " +
                           std::to_string(f.size()),
                       line);
    }
    const int cls = to_class(f[0], num_classes, line);
    const double conf = to_double(f[1], line);
    if (conf < 0.0 || conf > 1.0) throw ParseError("confidence outside [0,1]", line);
    out.push_back({cls, conf, to_box(std::span(f).subspan(2), line)});
  });
  return out;
}

std::string format_ground_truth(const std::vector<GroundTruthBox>& boxes) {
  std::string out;
  for (const auto& g : boxes) {
    out += std::to_string(g.class_id);
    append_box(out, g.box);
  }
  return out;
}

std::string format_predictions(const std::vector<Detection>& dets) {
  std::string out;
  for (const auto& d : dets) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%d %.6f", d.class_id, d.confidence);
    out += buf;
    append_box(out, d.box);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

namespace {

template <typename Parse>
auto load_dir(const std::filesystem::path& dir, Parse&& parse) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InvalidInputError("not a directory: " + dir.string());
  std::map<std::string, decltype(parse(std::string_view{}))> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    try {
      out[entry.path().stem().string()] = parse(read_text_file(entry.path()));
    } catch (const ParseError& e) {
      throw ParseError(entry.path().string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

ImageGroundTruth load_ground_truth_dir(const std::filesystem::path& dir, int num_classes) {
  return load_dir(dir, [num_classes](std::string_view t) { return parse_ground_truth(t, num_classes); });
}

ImageDetections load_prediction_dir(const std::filesystem::path& dir, int num_classes) {
  return load_dir(dir, [num_classes](std::string_view t) { return parse_predictions(t, num_classes); });
}

}  // namespace handqc

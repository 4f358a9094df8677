#include "handqc/train_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "handqc/annotation.hpp"
#include "handqc/error.hpp"

namespace handqc {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_positive_int(std::string_view key, std::string_view v, int line) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ParseError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'", line);
  }
  if (out <= 0) throw ParseError("'" + std::string(key) + "' must be positive", line);
  return out;
}

double parse_real(std::string_view key, std::string_view v, int line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ParseError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'", line);
  }
  return out;
}

double parse_fraction(std::string_view key, std::string_view v, int line) {
  const double out = parse_real(key, v, line);
  if (out < 0.0 || out > 1.0) throw ParseError("'" + std::string(key) + "' must lie in [0, 1]", line);
  return out;
}

bool parse_bool(std::string_view key, std::string_view v, int line) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ParseError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'", line);
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) throw ParseError("duplicate key '" + std::string(key) + "'", line_no);

    if (key == "epochs") {
      cfg.epochs = parse_positive_int(key, value, line_no);
    } else if (key == "batch") {
      cfg.batch = parse_positive_int(key, value, line_no);
    } else if (key == "imgsz") {
      cfg.imgsz = parse_positive_int(key, value, line_no);
    } else if (key == "lr0") {
      cfg.lr0 = parse_real(key, value, line_no);
      if (cfg.lr0 <= 0.0) throw ParseError("'lr0' must be positive", line_no);
    } else if (key == "optimizer") {
      if (value.empty()) throw ParseError("'optimizer' must not be empty", line_no);
      cfg.optimizer = std::string(value);
    } else if (key == "warmup") {
      cfg.warmup = parse_bool(key, value, line_no);
    } else if (key == "translate") {
      cfg.translate = parse_fraction(key, value, line_no);
    } else if (key == "scale") {
      cfg.scale = parse_fraction(key, value, line_no);
    } else if (key == "fliplr") {
      cfg.fliplr = parse_fraction(key, value, line_no);
    } else if (key == "mosaic") {
      cfg.mosaic = parse_fraction(key, value, line_no);
    } else {
      throw ParseError("unknown key '" + std::string(key) + "'", line_no);
    }
  }
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return parse_train_config(read_text_file(path));
}

std::string format_train_config(const TrainConfig& cfg) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "epochs=%d\nbatch=%d\nimgsz=%d\nlr0=%g\noptimizer=%s\nwarmup=%s\n"
                "translate=%g\nscale=%g\nfliplr=%g\nmosaic=%g\n",
                cfg.epochs, cfg.batch, cfg.imgsz, cfg.lr0, cfg.optimizer.c_str(),
                cfg.warmup ? "true" : "false", cfg.translate, cfg.scale, cfg.fliplr, cfg.mosaic);
  return buf;
}

}  // namespace handqc

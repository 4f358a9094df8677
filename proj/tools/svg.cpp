#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace handqc::svg {
namespace {

constexpr double kWidth = 480, kHeight = 360, kLeft = 50, kTop = 30, kPlotW = 400, kPlotH = 280;
constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                  num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" + escape(title) +
       "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kPlotW) + "\" height=\"" +
       num(kPlotH) + "\" fill=\"none\" stroke=\"black\"/>\n";
  return s;
}

double px(double fx) { return kLeft + fx * kPlotW; }
double py(double fy) { return kTop + (1.0 - fy) * kPlotH; }

std::string axis_label(double x, double y, const std::string& text, const char* anchor) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + escape(text) +
         "</text>\n";
}

}  // namespace

std::string pr_curves(const std::vector<std::pair<std::string, PRCurve>>& curves, const std::string& title) {
  std::string s = header(title);
  for (int t = 0; t <= 10; t += 2) {
    const double f = t / 10.0;
    s += axis_label(px(f), kTop + kPlotH + 14, num(f), "middle");
    s += axis_label(kLeft - 4, py(f) + 4, num(f), "end");
  }
  s += axis_label(px(0.5), kHeight - 8, "recall", "middle");
  s += "<text transform=\"translate(12," + num(py(0.5)) + ") rotate(-90)\" text-anchor=\"middle\">precision</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& [name, curve] = curves[i];
    const char* color = kColors[i % kColors.size()];
    if (!curve.points.empty()) {
      std::string pts = num(px(0.0)) + "," + num(py(curve.points.front().precision));
      for (const auto& p : curve.points) pts += " " + num(px(p.recall)) + "," + num(py(p.precision));
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    }
    const double ly = kTop + 14 + 14 * static_cast<double>(i);
    s += "<line x1=\"" + num(px(0.72)) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(px(0.77)) + "\" y2=\"" +
         num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += axis_label(px(0.79), ly, name + (curve.zero_support() ? " (no ground truth)" : ""), "start");
  }
  return s + "</svg>\n";
}

std::string histogram(const std::vector<double>& values, double lo, double hi, int bins,
                      const std::vector<double>& markers, const std::string& title) {
  bins = std::max(1, bins);
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    const double f = (v - lo) / (hi - lo) * bins;
    const int b = std::clamp(static_cast<int>(std::floor(f)), 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));

  std::string s = header(title);
  const double bw = kPlotW / bins;
  for (int b = 0; b < bins; ++b) {
    const double h = kPlotH * counts[static_cast<std::size_t>(b)] / peak;
    s += "<rect x=\"" + num(kLeft + b * bw) + "\" y=\"" + num(kTop + kPlotH - h) + "\" width=\"" + num(bw) +
         "\" height=\"" + num(h) + "\" fill=\"#1f77b4\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  for (double m : markers) {
    if (m < lo || m > hi) continue;
    const double x = px((m - lo) / (hi - lo));
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" + num(kTop + kPlotH) +
         "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  }
  s += axis_label(kLeft, kTop + kPlotH + 14, num(lo), "middle");
  s += axis_label(kLeft + kPlotW, kTop + kPlotH + 14, num(hi), "middle");
  s += axis_label(kLeft - 4, kTop + 4, std::to_string(peak), "end");
  s += axis_label(kLeft - 4, kTop + kPlotH + 4, "0", "end");
  s += axis_label(px(0.5), kHeight - 8, "score", "middle");
  return s + "</svg>\n";
}

}  // namespace handqc::svg

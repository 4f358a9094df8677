#pragma once

#include <string>
#include <utility>
#include <vector>

#include "handqc/evaluation.hpp"

namespace handqc::svg {

/// Precision/recall curves, one polyline per named curve, on a unit square plot.
std::string pr_curves(const std::vector<std::pair<std::string, PRCurve>>& curves, const std::string& title);

/// Histogram of `values` over [lo, hi) with `bins` equal bins; values outside are clamped
/// into the edge bins. `markers` draws vertical reference lines (e.g. category thresholds).
std::string histogram(const std::vector<double>& values, double lo, double hi, int bins,
                      const std::vector<double>& markers, const std::string& title);

}  // namespace handqc::svg

#include "handqc/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace handqc::nn {

GradCheckResult grad_check(const FlatBlock& block, const VectorXd& theta, std::uint64_t seed, double step) {
  const VectorXd y = block.forward(theta);
  if (!y.allFinite()) throw NumericError("forward pass produced a non-finite value");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const VectorXd upstream = VectorXd::NullaryExpr(y.size(), [&](Index) { return normal(rng); });
  const VectorXd analytic = block.backward(theta, upstream);
  if (analytic.size() != theta.size()) throw DimensionError("analytic gradient length mismatch");

  GradCheckResult r;
  r.coordinates = theta.size();
  using Extended = Vector<long double>;
  VectorXd probe = theta;
  Extended probe_ext = theta.cast<long double>();
  const Extended upstream_ext = upstream.cast<long double>();
  for (Index i = 0; i < theta.size(); ++i) {
    double numeric = 0.0;
    if (block.forward_extended) {
      probe_ext[i] = static_cast<long double>(theta[i]) + step;
      const Extended plus = block.forward_extended(probe_ext);
      probe_ext[i] = static_cast<long double>(theta[i]) - step;
      const Extended minus = block.forward_extended(probe_ext);
      probe_ext[i] = theta[i];
      if (!plus.allFinite() || !minus.allFinite()) {
        throw NumericError("forward pass produced a non-finite value");
      }
      numeric = static_cast<double>(upstream_ext.dot(plus - minus) / (2.0L * step));
    } else {
      probe[i] = theta[i] + step;
      const VectorXd plus = block.forward(probe);
      probe[i] = theta[i] - step;
      const VectorXd minus = block.forward(probe);
      probe[i] = theta[i];
      if (!plus.allFinite() || !minus.allFinite()) {
        throw NumericError("forward pass produced a non-finite value");
      }
      numeric = upstream.dot(plus - minus) / (2.0 * step);
    }
    const double abs_err = std::abs(analytic[i] - numeric);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kGradCheckFloor});
    const double rel = abs_err / denom;
    r.max_absolute_error = std::max(r.max_absolute_error, abs_err);
    if (rel > r.max_relative_error || r.worst_coordinate < 0) {
      r.max_relative_error = std::max(r.max_relative_error, rel);
      r.worst_coordinate = i;
    }
  }
  return r;
}

}  // namespace handqc::nn

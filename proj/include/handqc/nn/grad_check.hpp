#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "handqc/nn/tensor.hpp"

namespace handqc::nn {

/// A block flattened to one coordinate vector theta (input entries followed by parameters).
struct FlatBlock {
  std::function<VectorXd(const VectorXd& theta)> forward;
  /// Gradient of dot(upstream, forward(theta)) with respect to theta.
  std::function<VectorXd(const VectorXd& theta, const VectorXd& upstream)> backward;
  /// Optional extended-precision forward; when set, the finite-difference probes use it.
  std::function<Vector<long double>(const Vector<long double>& theta)> forward_extended;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  Index worst_coordinate = -1;
  Index coordinates = 0;
};

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckFloor = 1e-8;

/// Central differences of the scalar dot(u, forward(theta)) for a seeded Gaussian u, compared
/// against the analytic gradient at every coordinate. Output differences are taken elementwise
/// before the projection onto u. Relative error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Throws NumericError when the forward pass produces a non-finite value.
GradCheckResult grad_check(const FlatBlock& block, const VectorXd& theta, std::uint64_t seed,
                           double step = kGradCheckStep);

/// Copies every array visited by `for_each` into one vector, and back.
template <typename Params>
VectorXd flatten(const Params& p) {
  Index n = 0;
  p.for_each([&](const auto& m) { n += m.size(); });
  VectorXd out(n);
  Index at = 0;
  p.for_each([&](const auto& m) {
    for (Index i = 0; i < m.size(); ++i) out[at++] = m.data()[i];
  });
  return out;
}

template <typename Flat, typename Params>
void unflatten(const Flat& flat, Index offset, Params& p) {
  p.for_each([&](auto& m) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = flat[offset++];
  });
  if (offset != flat.size()) throw DimensionError("flattened parameter length mismatch");
}

struct BlockCheck {
  std::string block;
  std::string config;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

BlockCheck check_linear(std::uint64_t seed, Index n, Index in, Index out);
BlockCheck check_softmax(std::uint64_t seed, Index n, Index d);
BlockCheck check_layer_norm(std::uint64_t seed, Index n, Index d);
BlockCheck check_gelu(std::uint64_t seed, Index n, Index d);
BlockCheck check_se(std::uint64_t seed, Index channels, Index height, Index width, Index reduction = 16);
BlockCheck check_mha(std::uint64_t seed, Index n, Index d, Index heads);
BlockCheck check_encoder(std::uint64_t seed, Index n, Index d, Index heads);

struct BlockCheckOptions {
  std::uint64_t seed = 0;
  int configs = 20;  // seeded random configurations per attention block
  Index max_tokens = 4;
  Index max_width = 16;
  Index max_channels = 8;
};

/// The full verification table: primitives once each, then `configs` random SE and
/// encoder/attention configurations within the size limits.
std::vector<BlockCheck> run_block_checks(const BlockCheckOptions& opts);

}  // namespace handqc::nn

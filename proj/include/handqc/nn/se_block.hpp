#pragma once

#include <algorithm>
#include <random>

#include "handqc/nn/layers.hpp"

namespace handqc::nn {

/// Squeeze-and-excitation parameters for C channels with a max(1, C/r) bottleneck.
template <typename Scalar>
struct SEParams {
  Index channels = 0;
  Index reduction = 16;
  Matrix<Scalar> w1;  // bottleneck x C
  Vector<Scalar> b1;
  Matrix<Scalar> w2;  // C x bottleneck
  Vector<Scalar> b2;

  static Index bottleneck_for(Index channels, Index reduction) {
    return std::max<Index>(1, channels / reduction);
  }
  Index bottleneck() const { return bottleneck_for(channels, reduction); }

  static SEParams zeros(Index channels, Index reduction = 16) {
    if (channels < 1 || reduction < 1) throw ConfigError("SE block needs C >= 1 and r >= 1");
    const Index b = bottleneck_for(channels, reduction);
    return {channels, reduction, Matrix<Scalar>::Zero(b, channels), Vector<Scalar>::Zero(b),
            Matrix<Scalar>::Zero(channels, b), Vector<Scalar>::Zero(channels)};
  }

  template <typename Rng>
  static SEParams random(Index channels, Index reduction, Rng& rng, Scalar stddev = Scalar(0.5)) {
    SEParams p = zeros(channels, reduction);
    std::normal_distribution<Scalar> n(Scalar(0), stddev);
    p.for_each([&](auto& m) { m = m.unaryExpr([&](Scalar) { return n(rng); }); });
    return p;
  }

  void validate() const {
    const Index b = bottleneck();
    if (w1.rows() != b || w1.cols() != channels || b1.size() != b || w2.rows() != channels ||
        w2.cols() != b || b2.size() != channels) {
      throw DimensionError("SE parameters inconsistent with C=" + std::to_string(channels) +
                           " bottleneck=" + std::to_string(b));
    }
  }

  /// Visits w1, b1, w2, b2 in that order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn(w1);
    fn(b1);
    fn(w2);
    fn(b2);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn(w1);
    fn(b1);
    fn(w2);
    fn(b2);
  }
};

namespace detail {

template <typename Scalar>
struct SEForward {
  Vector<Scalar> squeezed;  // C
  Vector<Scalar> hidden_pre;
  Vector<Scalar> hidden;
  Vector<Scalar> gates;  // C
};

template <typename Scalar>
SEForward<Scalar> se_gates_impl(const Tensor<Scalar>& x, const SEParams<Scalar>& p) {
  if (x.rank() != 3) throw DimensionError("SE block expects a C x H x W tensor, got " + x.shape_str());
  if (x.dim(0) != p.channels) {
    throw DimensionError("SE block configured for " + std::to_string(p.channels) +
                         " channels, input has " + std::to_string(x.dim(0)));
  }
  p.validate();
  SEForward<Scalar> f;
  f.squeezed = x.rows_view().rowwise().mean();
  f.hidden_pre = p.w1 * f.squeezed + p.b1;
  f.hidden = f.hidden_pre.cwiseMax(Scalar(0));
  f.gates = (p.w2 * f.hidden + p.b2).unaryExpr([](Scalar v) { return sigmoid(v); });
  return f;
}

}  // namespace detail

/// Channel gates sigmoid(W2 relu(W1 s + b1) + b2) for s the per-channel spatial mean.
template <typename Scalar>
Vector<Scalar> se_gates(const Tensor<Scalar>& x, const SEParams<Scalar>& p) {
  return detail::se_gates_impl(x, p).gates;
}

/// y[c] = gate[c] * x[c] for x shaped C x H x W.
template <typename Scalar>
Tensor<Scalar> se_forward(const Tensor<Scalar>& x, const SEParams<Scalar>& p) {
  const auto f = detail::se_gates_impl(x, p);
  Tensor<Scalar> y(x.shape());
  y.rows_view() = f.gates.asDiagonal() * x.rows_view();
  return y;
}

template <typename Scalar>
struct SEGrad {
  Tensor<Scalar> dx;
  SEParams<Scalar> params;
};

template <typename Scalar>
SEGrad<Scalar> se_backward(const Tensor<Scalar>& x, const SEParams<Scalar>& p, const Tensor<Scalar>& dy) {
  if (dy.shape() != x.shape()) throw DimensionError("SE upstream gradient shape mismatch");
  const auto f = detail::se_gates_impl(x, p);
  const auto X = x.rows_view();
  const auto dY = dy.rows_view();
  const auto spatial = static_cast<Scalar>(X.cols());

  SEGrad<Scalar> g{Tensor<Scalar>(x.shape()), SEParams<Scalar>::zeros(p.channels, p.reduction)};
  const Vector<Scalar> dgate = (dY.array() * X.array()).rowwise().sum().matrix();
  const Vector<Scalar> dz2 = (dgate.array() * f.gates.array() * (Scalar(1) - f.gates.array())).matrix();
  g.params.w2 = dz2 * f.hidden.transpose();
  g.params.b2 = dz2;
  const Vector<Scalar> dz1 =
      ((p.w2.transpose() * dz2).array() * (f.hidden_pre.array() > Scalar(0)).template cast<Scalar>())
          .matrix();
  g.params.w1 = dz1 * f.squeezed.transpose();
  g.params.b1 = dz1;
  const Vector<Scalar> dsqueezed = p.w1.transpose() * dz1;

  auto dX = g.dx.rows_view();
  dX = f.gates.asDiagonal() * dY;
  dX.colwise() += dsqueezed / spatial;
  return g;
}

}  // namespace handqc::nn

#pragma once

#include <cmath>
#include <concepts>
#include <numbers>

#include "handqc/nn/tensor.hpp"

namespace handqc::nn {

// Row-wise primitives over n x d token matrices. Each forward has a matching *_backward that
// maps the upstream gradient dy (same shape as the output) to input/parameter gradients.

template <typename Scalar>
struct LinearGrad {
  Matrix<Scalar> dx;
  Matrix<Scalar> dw;
  Vector<Scalar> db;
};

/// y = x W^T + b for x (n x in), W (out x in), b (out).
template <typename Scalar>
Matrix<Scalar> linear(const Matrix<Scalar>& x, const Matrix<Scalar>& w, const Vector<Scalar>& b) {
  if (x.cols() != w.cols() || b.size() != w.rows()) {
    throw DimensionError("linear: input " + shape_string(x.rows(), x.cols()) + " against weight " +
                         shape_string(w.rows(), w.cols()) + " and bias " + std::to_string(b.size()));
  }
  Matrix<Scalar> y = x * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

template <typename Scalar>
LinearGrad<Scalar> linear_backward(const Matrix<Scalar>& x, const Matrix<Scalar>& w,
                                   const Matrix<Scalar>& dy) {
  if (dy.rows() != x.rows() || dy.cols() != w.rows() || x.cols() != w.cols()) {
    throw DimensionError("linear_backward: upstream " + shape_string(dy.rows(), dy.cols()) +
                         " does not fit input " + shape_string(x.rows(), x.cols()) + " and weight " +
                         shape_string(w.rows(), w.cols()));
  }
  return {dy * w, dy.transpose() * x, dy.colwise().sum().transpose()};
}

/// Softmax along each row, shifted by the row maximum.
template <typename Scalar>
Matrix<Scalar> softmax(const Matrix<Scalar>& x) {
  Matrix<Scalar> y = (x.colwise() - x.rowwise().maxCoeff()).array().exp().matrix();
  y.array().colwise() /= y.rowwise().sum().array();
  return y;
}

/// Takes the softmax output y rather than its input.
template <typename Scalar>
Matrix<Scalar> softmax_backward(const Matrix<Scalar>& y, const Matrix<Scalar>& dy) {
  const Vector<Scalar> dot = (dy.array() * y.array()).rowwise().sum().matrix();
  return (y.array() * (dy.colwise() - dot).array()).matrix();
}

template <typename Scalar>
struct LayerNormGrad {
  Matrix<Scalar> dx;
  Vector<Scalar> dgain;
  Vector<Scalar> dbias;
};

/// Per-row normalization with population variance, then affine gain/bias.
template <typename Scalar>
Matrix<Scalar> layer_norm(const Matrix<Scalar>& x, const Vector<Scalar>& gain,
                          const Vector<Scalar>& bias, Scalar eps) {
  if (gain.size() != x.cols() || bias.size() != x.cols()) {
    throw DimensionError("layer_norm: width " + std::to_string(x.cols()) + " but gain/bias " +
                         std::to_string(gain.size()) + "/" + std::to_string(bias.size()));
  }
  const Vector<Scalar> mean = x.rowwise().mean();
  const Matrix<Scalar> centered = x.colwise() - mean;
  const Vector<Scalar> rstd =
      ((centered.array().square().rowwise().mean() + eps).rsqrt()).matrix();
  Matrix<Scalar> y = (centered.array().colwise() * rstd.array()).matrix();
  y.array().rowwise() *= gain.transpose().array();
  y.rowwise() += bias.transpose();
  return y;
}

template <typename Scalar>
LayerNormGrad<Scalar> layer_norm_backward(const Matrix<Scalar>& x, const Vector<Scalar>& gain,
                                          Scalar eps, const Matrix<Scalar>& dy) {
  const Vector<Scalar> mean = x.rowwise().mean();
  const Matrix<Scalar> centered = x.colwise() - mean;
  const Vector<Scalar> rstd =
      ((centered.array().square().rowwise().mean() + eps).rsqrt()).matrix();
  const Matrix<Scalar> xhat = (centered.array().colwise() * rstd.array()).matrix();

  LayerNormGrad<Scalar> g;
  g.dgain = (dy.array() * xhat.array()).colwise().sum().transpose().matrix();
  g.dbias = dy.colwise().sum().transpose();
  const Matrix<Scalar> dxhat = (dy.array().rowwise() * gain.transpose().array()).matrix();
  const Vector<Scalar> mean_d = dxhat.rowwise().mean();
  const Vector<Scalar> mean_dx = (dxhat.array() * xhat.array()).rowwise().mean().matrix();
  g.dx = ((dxhat.colwise() - mean_d).array() - xhat.array().colwise() * mean_dx.array())
             .colwise() *
         rstd.array();
  return g;
}

/// Exact GELU, x * Phi(x).
template <std::floating_point Scalar>
Scalar gelu(Scalar x) {
  return Scalar(0.5) * x * (Scalar(1) + std::erf(x / std::numbers::sqrt2_v<Scalar>));
}

template <std::floating_point Scalar>
Scalar gelu_derivative(Scalar x) {
  const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x / std::numbers::sqrt2_v<Scalar>));
  const Scalar pdf = std::exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
                     std::numbers::sqrt2_v<Scalar>;
  return cdf + x * pdf;
}

template <typename Derived>
auto gelu(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return gelu(v); }).eval();
}

template <typename Scalar>
Matrix<Scalar> gelu_backward(const Matrix<Scalar>& x, const Matrix<Scalar>& dy) {
  return (dy.array() * x.unaryExpr([](Scalar v) { return gelu_derivative(v); }).array()).matrix();
}

template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  // Split by sign so exp never overflows.
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

}  // namespace handqc::nn

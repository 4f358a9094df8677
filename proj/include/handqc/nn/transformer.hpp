#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "handqc/nn/layers.hpp"

namespace handqc::nn {

/// Pre-norm transformer encoder block of width d with h heads and a d -> 4d -> d GELU MLP.
template <typename Scalar>
struct TransformerParams {
  Index width = 0;
  Index heads = 4;
  Scalar eps = Scalar(1e-5);

  Matrix<Scalar> wq, wk, wv, wo;  // d x d
  Vector<Scalar> bq, bv, bo;  // keys carry no bias: it would shift every score in a row equally
  Vector<Scalar> ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  Matrix<Scalar> mlp_w1;  // 4d x d
  Vector<Scalar> mlp_b1;
  Matrix<Scalar> mlp_w2;  // d x 4d
  Vector<Scalar> mlp_b2;

  Index head_dim() const { return width / heads; }

  /// Every entry zero, layer-norm gains included. Also the gradient accumulator shape.
  static TransformerParams zeros(Index width, Index heads = 4) {
    TransformerParams p;
    p.width = width;
    p.heads = heads;
    p.check_heads();
    const Index d = width, m = 4 * width;
    p.wq = p.wk = p.wv = p.wo = Matrix<Scalar>::Zero(d, d);
    p.bq = p.bv = p.bo = Vector<Scalar>::Zero(d);
    p.ln1_gain = p.ln1_bias = p.ln2_gain = p.ln2_bias = Vector<Scalar>::Zero(d);
    p.mlp_w1 = Matrix<Scalar>::Zero(m, d);
    p.mlp_b1 = Vector<Scalar>::Zero(m);
    p.mlp_w2 = Matrix<Scalar>::Zero(d, m);
    p.mlp_b2 = Vector<Scalar>::Zero(d);
    return p;
  }

  /// Gaussian weights scaled by 1/sqrt(fan_in); layer-norm gains around 1.
  template <typename Rng>
  static TransformerParams random(Index width, Index heads, Rng& rng) {
    TransformerParams p = zeros(width, heads);
    std::normal_distribution<Scalar> n(Scalar(0), Scalar(1));
    auto fill = [&](auto& m, Scalar scale, Scalar offset = Scalar(0)) {
      m = m.unaryExpr([&](Scalar) { return offset + scale * n(rng); });
    };
    const Scalar sd = Scalar(1) / std::sqrt(static_cast<Scalar>(width));
    const Scalar sm = Scalar(1) / std::sqrt(static_cast<Scalar>(4 * width));
    for (auto* m : {&p.wq, &p.wk, &p.wv, &p.wo}) fill(*m, sd);
    for (auto* v : {&p.bq, &p.bv, &p.bo, &p.ln1_bias, &p.ln2_bias, &p.mlp_b2}) fill(*v, Scalar(0.1));
    fill(p.ln1_gain, Scalar(0.1), Scalar(1));
    fill(p.ln2_gain, Scalar(0.1), Scalar(1));
    fill(p.mlp_w1, sd);
    fill(p.mlp_b1, Scalar(0.1));
    fill(p.mlp_w2, sm);
    return p;
  }

  void check_heads() const {
    if (width < 1 || heads < 1 || width % heads != 0) {
      throw ConfigError("model width " + std::to_string(width) + " is not divisible by " +
                        std::to_string(heads) + " heads");
    }
  }

  void validate() const {
    check_heads();
    const Index d = width, m = 4 * width;
    auto square = [d](const Matrix<Scalar>& w) { return w.rows() == d && w.cols() == d; };
    bool ok = square(wq) && square(wk) && square(wv) && square(wo) && mlp_w1.rows() == m &&
              mlp_w1.cols() == d && mlp_w2.rows() == d && mlp_w2.cols() == m && mlp_b1.size() == m;
    for (const auto* v : {&bq, &bv, &bo, &ln1_gain, &ln1_bias, &ln2_gain, &ln2_bias, &mlp_b2}) {
      ok = ok && v->size() == d;
    }
    if (!ok) throw DimensionError("transformer parameters inconsistent with width " + std::to_string(d));
  }

  /// Visits every parameter array in a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    visit(*this, fn);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    visit(*this, fn);
  }

private:
  template <typename Self, typename Fn>
  static void visit(Self& p, Fn& fn) {
    fn(p.wq); fn(p.bq); fn(p.wk); fn(p.wv); fn(p.bv); fn(p.wo); fn(p.bo);
    fn(p.ln1_gain); fn(p.ln1_bias); fn(p.ln2_gain); fn(p.ln2_bias);
    fn(p.mlp_w1); fn(p.mlp_b1); fn(p.mlp_w2); fn(p.mlp_b2);
  }
};

namespace detail {

template <typename Scalar>
struct AttentionForward {
  Matrix<Scalar> q, k, v;
  std::vector<Matrix<Scalar>> weights;  // per head, n x n
  Matrix<Scalar> concat;                // n x d
  Matrix<Scalar> out;
};

template <typename Scalar>
AttentionForward<Scalar> attention_impl(const Matrix<Scalar>& x, const TransformerParams<Scalar>& p) {
  p.validate();
  if (x.rows() < 1 || x.cols() != p.width) {
    throw DimensionError("attention expects n x " + std::to_string(p.width) + " tokens, got " +
                         shape_string(x.rows(), x.cols()));
  }
  AttentionForward<Scalar> f;
  f.q = linear(x, p.wq, p.bq);
  f.k = x * p.wk.transpose();
  f.v = linear(x, p.wv, p.bv);
  const Index dh = p.head_dim();
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  f.concat.resize(x.rows(), p.width);
  for (Index h = 0; h < p.heads; ++h) {
    const Matrix<Scalar> scores =
        scale * f.q.middleCols(h * dh, dh) * f.k.middleCols(h * dh, dh).transpose();
    f.weights.push_back(softmax(scores));
    f.concat.middleCols(h * dh, dh) = f.weights.back() * f.v.middleCols(h * dh, dh);
  }
  f.out = linear(f.concat, p.wo, p.bo);
  return f;
}

}  // namespace detail

/// Multi-head self-attention: per head softmax(Q K^T / sqrt(d/h)) V, heads concatenated and
/// projected by the output weights.
template <typename Scalar>
Matrix<Scalar> mha_forward(const Matrix<Scalar>& x, const TransformerParams<Scalar>& p) {
  return detail::attention_impl(x, p).out;
}

/// Gradient of an op with respect to its token input and its parameters; parameter fields the
/// op does not use stay zero.
template <typename Scalar>
struct TransformerGrad {
  Matrix<Scalar> dx;
  TransformerParams<Scalar> params;
};

template <typename Scalar>
TransformerGrad<Scalar> mha_backward(const Matrix<Scalar>& x, const TransformerParams<Scalar>& p,
                                     const Matrix<Scalar>& dy) {
  const auto f = detail::attention_impl(x, p);
  TransformerGrad<Scalar> g{Matrix<Scalar>(), TransformerParams<Scalar>::zeros(p.width, p.heads)};

  const auto out = linear_backward(f.concat, p.wo, dy);
  g.params.wo = out.dw;
  g.params.bo = out.db;

  const Index dh = p.head_dim();
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  Matrix<Scalar> dq(x.rows(), p.width), dk(x.rows(), p.width), dv(x.rows(), p.width);
  for (Index h = 0; h < p.heads; ++h) {
    const auto& a = f.weights[static_cast<std::size_t>(h)];
    const Matrix<Scalar> dout_h = out.dx.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = a.transpose() * dout_h;
    const Matrix<Scalar> dscores =
        scale * softmax_backward(a, Matrix<Scalar>(dout_h * f.v.middleCols(h * dh, dh).transpose()));
    dq.middleCols(h * dh, dh) = dscores * f.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh) = dscores.transpose() * f.q.middleCols(h * dh, dh);
  }

  const auto gq = linear_backward(x, p.wq, dq);
  const auto gk = linear_backward(x, p.wk, dk);
  const auto gv = linear_backward(x, p.wv, dv);
  g.params.wq = gq.dw;
  g.params.bq = gq.db;
  g.params.wk = gk.dw;
  g.params.wv = gv.dw;
  g.params.bv = gv.db;
  g.dx = gq.dx + gk.dx + gv.dx;
  return g;
}

namespace detail {

template <typename Scalar>
struct EncoderForward {
  Matrix<Scalar> norm1, attn_in_residual, norm2, hidden_pre, hidden, out;
};

template <typename Scalar>
EncoderForward<Scalar> encoder_impl(const Matrix<Scalar>& x, const TransformerParams<Scalar>& p) {
  EncoderForward<Scalar> f;
  f.norm1 = layer_norm(x, p.ln1_gain, p.ln1_bias, p.eps);
  f.attn_in_residual = x + mha_forward(f.norm1, p);
  f.norm2 = layer_norm(f.attn_in_residual, p.ln2_gain, p.ln2_bias, p.eps);
  f.hidden_pre = linear(f.norm2, p.mlp_w1, p.mlp_b1);
  f.hidden = gelu(f.hidden_pre);
  f.out = f.attn_in_residual + linear(f.hidden, p.mlp_w2, p.mlp_b2);
  return f;
}

}  // namespace detail

/// x1 = x + MHA(LN1(x)); y = x1 + MLP(LN2(x1)). No positional term inside the block.
template <typename Scalar>
Matrix<Scalar> transformer_encoder_forward(const Matrix<Scalar>& x, const TransformerParams<Scalar>& p) {
  return detail::encoder_impl(x, p).out;
}

template <typename Scalar>
TransformerGrad<Scalar> transformer_encoder_backward(const Matrix<Scalar>& x,
                                                     const TransformerParams<Scalar>& p,
                                                     const Matrix<Scalar>& dy) {
  const auto f = detail::encoder_impl(x, p);

  // MLP branch.
  const auto fc2 = linear_backward(f.hidden, p.mlp_w2, dy);
  const Matrix<Scalar> dhidden_pre = gelu_backward(f.hidden_pre, fc2.dx);
  const auto fc1 = linear_backward(f.norm2, p.mlp_w1, dhidden_pre);
  const auto ln2 = layer_norm_backward(f.attn_in_residual, p.ln2_gain, p.eps, fc1.dx);
  const Matrix<Scalar> dx1 = dy + ln2.dx;

  // Attention branch.
  auto g = mha_backward(f.norm1, p, dx1);
  const auto ln1 = layer_norm_backward(x, p.ln1_gain, p.eps, g.dx);
  g.dx = dx1 + ln1.dx;

  g.params.ln1_gain = ln1.dgain;
  g.params.ln1_bias = ln1.dbias;
  g.params.ln2_gain = ln2.dgain;
  g.params.ln2_bias = ln2.dbias;
  g.params.mlp_w1 = fc1.dw;
  g.params.mlp_b1 = fc1.db;
  g.params.mlp_w2 = fc2.dw;
  g.params.mlp_b2 = fc2.db;
  return g;
}

}  // namespace handqc::nn

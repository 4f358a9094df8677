#include <algorithm>
#include <random>
#include <string>

#include "handqc/nn/grad_check.hpp"
#include "handqc/nn/layers.hpp"
#include "handqc/nn/se_block.hpp"
#include "handqc/nn/transformer.hpp"

namespace handqc::nn {
namespace {

constexpr double kPrimitiveTolerance = 1e-5;
constexpr double kLinearTolerance = 1e-6;
constexpr double kBlockTolerance = 1e-4;

MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  return MatrixXd::NullaryExpr(rows, cols, [&](Index, Index) { return n(rng); });
}

VectorXd random_vector(Index size, std::mt19937_64& rng, double sd = 1.0, double mean = 0.0) {
  std::normal_distribution<double> n(mean, sd);
  return VectorXd::NullaryExpr(size, [&](Index) { return n(rng); });
}

template <typename S>
Matrix<S> as_matrix(const Vector<S>& flat, Index offset, Index rows, Index cols) {
  return Eigen::Map<const Matrix<S>>(flat.data() + offset, rows, cols);
}

template <typename S>
Vector<S> as_flat(const Matrix<S>& m) {
  return Eigen::Map<const Vector<S>>(m.data(), m.size());
}

VectorXd concat(const VectorXd& a, const VectorXd& b) {
  VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

/// Wraps a forward generic over the scalar type as a double block with an extended twin.
template <typename Forward, typename Backward>
FlatBlock make_block(Forward forward, Backward backward) {
  return FlatBlock{[forward](const VectorXd& t) { return forward(t); }, backward,
                   [forward](const Vector<long double>& t) { return forward(t); }};
}

BlockCheck finish(std::string block, std::string config, const FlatBlock& f, const VectorXd& theta,
                  std::uint64_t seed, double tolerance) {
  const auto r = grad_check(f, theta, seed);
  return {std::move(block), std::move(config), r.max_relative_error, tolerance,
          r.max_relative_error < tolerance};
}

template <typename S>
struct LinearParams {
  Matrix<S> w;
  Vector<S> b;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn(w);
    fn(b);
  }
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn(w);
    fn(b);
  }
};

template <typename S>
struct NormParams {
  Vector<S> gain;
  Vector<S> bias;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn(gain);
    fn(bias);
  }
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn(gain);
    fn(bias);
  }
};

std::string tokens_config(Index n, Index d) { return "n=" + std::to_string(n) + " d=" + std::to_string(d); }

}  // namespace

BlockCheck check_linear(std::uint64_t seed, Index n, Index in, Index out) {
  std::mt19937_64 rng(seed);
  const MatrixXd x = random_matrix(n, in, rng);
  const LinearParams<double> p{random_matrix(out, in, rng), random_vector(out, rng)};
  const Index nx = n * in;
  auto decode = [=]<typename S>(const Vector<S>& t) {
    LinearParams<S> q{Matrix<S>(out, in), Vector<S>(out)};
    unflatten(t, nx, q);
    return std::pair{as_matrix(t, 0, n, in), q};
  };
  auto forward = [=]<typename S>(const Vector<S>& t) {
    const auto [xx, q] = decode(t);
    return as_flat<S>(linear(xx, q.w, q.b));
  };
  auto backward = [=](const VectorXd& t, const VectorXd& u) {
    const auto [xx, q] = decode(t);
    const auto g = linear_backward(xx, q.w, as_matrix(u, 0, n, out));
    return concat(as_flat(g.dx), flatten(LinearParams<double>{g.dw, g.db}));
  };
  return finish("linear", "n=" + std::to_string(n) + " in=" + std::to_string(in) + " out=" + std::to_string(out),
                make_block(forward, backward), concat(as_flat(x), flatten(p)), seed, kLinearTolerance);
}

BlockCheck check_softmax(std::uint64_t seed, Index n, Index d) {
  std::mt19937_64 rng(seed);
  const MatrixXd x = random_matrix(n, d, rng);
  auto forward = [=]<typename S>(const Vector<S>& t) { return as_flat<S>(softmax(as_matrix(t, 0, n, d))); };
  auto backward = [=](const VectorXd& t, const VectorXd& u) {
    const MatrixXd y = softmax(as_matrix(t, 0, n, d));
    return as_flat<double>(softmax_backward(y, as_matrix(u, 0, n, d)));
  };
  return finish("softmax", tokens_config(n, d), make_block(forward, backward), as_flat(x), seed,
                kPrimitiveTolerance);
}

BlockCheck check_layer_norm(std::uint64_t seed, Index n, Index d) {
  std::mt19937_64 rng(seed);
  const MatrixXd x = random_matrix(n, d, rng);
  const NormParams<double> p{random_vector(d, rng, 0.2, 1.0), random_vector(d, rng, 0.1)};
  const double eps = 1e-5;
  auto decode = [=]<typename S>(const Vector<S>& t) {
    NormParams<S> q{Vector<S>(d), Vector<S>(d)};
    unflatten(t, n * d, q);
    return std::pair{as_matrix(t, 0, n, d), q};
  };
  auto forward = [=]<typename S>(const Vector<S>& t) {
    const auto [xx, q] = decode(t);
    return as_flat<S>(layer_norm(xx, q.gain, q.bias, static_cast<S>(eps)));
  };
  auto backward = [=](const VectorXd& t, const VectorXd& u) {
    const auto [xx, q] = decode(t);
    const auto g = layer_norm_backward(xx, q.gain, eps, as_matrix(u, 0, n, d));
    return concat(as_flat(g.dx), flatten(NormParams<double>{g.dgain, g.dbias}));
  };
  return finish("layer_norm", tokens_config(n, d), make_block(forward, backward), concat(as_flat(x), flatten(p)),
                seed, kPrimitiveTolerance);
}

BlockCheck check_gelu(std::uint64_t seed, Index n, Index d) {
  std::mt19937_64 rng(seed);
  const MatrixXd x = random_matrix(n, d, rng, 2.0);
  auto forward = [=]<typename S>(const Vector<S>& t) {
    return as_flat<S>(Matrix<S>(gelu(as_matrix(t, 0, n, d))));
  };
  auto backward = [=](const VectorXd& t, const VectorXd& u) {
    return as_flat<double>(gelu_backward(as_matrix(t, 0, n, d), as_matrix(u, 0, n, d)));
  };
  return finish("gelu", tokens_config(n, d), make_block(forward, backward), as_flat(x), seed, kPrimitiveTolerance);
}

BlockCheck check_se(std::uint64_t seed, Index channels, Index height, Index width, Index reduction) {
  std::mt19937_64 rng(seed);
  const std::vector<Index> shape{channels, height, width};
  const Index nx = channels * height * width;
  const VectorXd x = random_vector(nx, rng);
  const auto p = SEParams<double>::random(channels, reduction, rng);
  auto decode = [=]<typename S>(const Vector<S>& t) {
    auto q = SEParams<S>::zeros(channels, reduction);
    unflatten(t, nx, q);
    return std::pair{Tensor<S>(shape, t.head(nx)), q};
  };
  auto forward = [=]<typename S>(const Vector<S>& t) {
    const auto [xx, q] = decode(t);
    return se_forward(xx, q).data();
  };
  auto backward = [=](const VectorXd& t, const VectorXd& u) {
    const auto [xx, q] = decode(t);
    const auto g = se_backward(xx, q, Tensor<double>(shape, u));
    return concat(g.dx.data(), flatten(g.params));
  };
  const std::string cfg = "C=" + std::to_string(channels) + " H=" + std::to_string(height) +
                          " W=" + std::to_string(width) + " r=" + std::to_string(reduction);
  return finish("se_block", cfg, make_block(forward, backward), concat(x, flatten(p)), seed, kBlockTolerance);
}

namespace {

template <typename Forward, typename Backward>
BlockCheck check_transformer_op(std::string name, std::uint64_t seed, Index n, Index d, Index heads,
                                Forward forward, Backward backward) {
  std::mt19937_64 rng(seed);
  const MatrixXd x = random_matrix(n, d, rng);
  const auto p = TransformerParams<double>::random(d, heads, rng);
  auto decode = [=]<typename S>(const Vector<S>& t) {
    auto q = TransformerParams<S>::zeros(d, heads);
    unflatten(t, n * d, q);
    return std::pair{as_matrix(t, 0, n, d), q};
  };
  auto flat_forward = [=]<typename S>(const Vector<S>& t) {
    const auto [xx, q] = decode(t);
    return as_flat<S>(forward(xx, q));
  };
  auto flat_backward = [=](const VectorXd& t, const VectorXd& u) {
    const auto [xx, q] = decode(t);
    const auto g = backward(xx, q, as_matrix(u, 0, n, d));
    return concat(as_flat(g.dx), flatten(g.params));
  };
  const std::string cfg = tokens_config(n, d) + " h=" + std::to_string(heads);
  return finish(std::move(name), cfg, make_block(flat_forward, flat_backward), concat(as_flat(x), flatten(p)),
                seed, kBlockTolerance);
}

}  // namespace

BlockCheck check_mha(std::uint64_t seed, Index n, Index d, Index heads) {
  return check_transformer_op(
      "mha", seed, n, d, heads, [](const auto& x, const auto& p) { return mha_forward(x, p); },
      [](const MatrixXd& x, const TransformerParams<double>& p, const MatrixXd& dy) {
        return mha_backward(x, p, dy);
      });
}

BlockCheck check_encoder(std::uint64_t seed, Index n, Index d, Index heads) {
  return check_transformer_op(
      "transformer_encoder", seed, n, d, heads,
      [](const auto& x, const auto& p) { return transformer_encoder_forward(x, p); },
      [](const MatrixXd& x, const TransformerParams<double>& p, const MatrixXd& dy) {
        return transformer_encoder_backward(x, p, dy);
      });
}

std::vector<BlockCheck> run_block_checks(const BlockCheckOptions& opts) {
  std::vector<BlockCheck> out;
  out.push_back(check_linear(opts.seed, 3, 4, 5));
  out.push_back(check_softmax(opts.seed, 3, 5));
  out.push_back(check_layer_norm(opts.seed, 3, 6));
  out.push_back(check_gelu(opts.seed, 3, 6));
  out.push_back(check_encoder(opts.seed, std::min<Index>(3, opts.max_tokens),
                              std::min<Index>(8, opts.max_width), 2));

  std::mt19937_64 rng(opts.seed);
  auto pick = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); };
  for (int i = 0; i < opts.configs; ++i) {
    const std::uint64_t seed = opts.seed + 1000 + static_cast<std::uint64_t>(i);

    const Index channels = pick(1, opts.max_channels);
    const Index reductions[] = {1, 2, 4, 16};
    out.push_back(check_se(seed, channels, pick(1, 4), pick(1, 4), reductions[pick(0, 3)]));

    const Index n = pick(1, opts.max_tokens);
    Index heads = Index{1} << pick(0, 2);
    while (heads > std::max<Index>(1, opts.max_width)) heads /= 2;
    // Layer norm over fewer than 4 features saturates to +-1, so narrower widths are skipped
    // whenever the limit allows.
    const Index per_head_max = std::max<Index>(1, opts.max_width / heads);
    const Index per_head_min = std::min(per_head_max, (4 + heads - 1) / heads);
    const Index d = heads * pick(per_head_min, per_head_max);
    out.push_back(check_mha(seed, n, d, heads));
    out.push_back(check_encoder(seed, n, d, heads));
  }
  return out;
}

}  // namespace handqc::nn

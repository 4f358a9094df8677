#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "handqc/error.hpp"

namespace handqc::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

inline std::string shape_string(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

/// Row-major array of rank 1 to 4 with its shape.
template <typename Scalar>
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(std::vector<Index> shape) : shape_(std::move(shape)) {
    check_shape();
    data_ = Vector<Scalar>::Zero(element_count());
  }

  Tensor(std::vector<Index> shape, Vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != element_count()) {
      throw DimensionError("tensor data has " + std::to_string(data_.size()) + " values for shape " +
                           shape_str());
    }
  }

  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  const std::vector<Index>& shape() const noexcept { return shape_; }
  Index dim(std::size_t axis) const { return shape_.at(axis); }
  Index size() const noexcept { return data_.size(); }

  Vector<Scalar>& data() noexcept { return data_; }
  const Vector<Scalar>& data() const noexcept { return data_; }

  bool all_finite() const { return data_.allFinite(); }

  /// Leading axis as rows, all remaining axes flattened into columns
  /// (a C x H x W tensor becomes C x (H*W)).
  Eigen::Map<Matrix<Scalar>> rows_view() {
    return {data_.data(), shape_.front(), size() / shape_.front()};
  }
  Eigen::Map<const Matrix<Scalar>> rows_view() const {
    return {data_.data(), shape_.front(), size() / shape_.front()};
  }

  std::string shape_str() const {
    std::string s;
    for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "x" : "") + std::to_string(shape_[i]);
    return s;
  }


private:
  Index element_count() const {
    return std::accumulate(shape_.begin(), shape_.end(), Index{1}, std::multiplies<>());
  }

  void check_shape() const {
    if (shape_.empty() || shape_.size() > 4) throw DimensionError("tensor rank must be 1..4");
    for (const Index e : shape_) {
      if (e < 1) throw DimensionError("tensor extents must be positive");
    }
  }

  std::vector<Index> shape_;
  Vector<Scalar> data_;
};

}  // namespace handqc::nn

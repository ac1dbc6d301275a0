#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvn/types.hpp"

namespace mvn {

// Dense row-major N-d array: the carrier for images, normal maps, anomaly
// maps, feature exports and every MVNT file payload.
template <typename Scalar>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(std::vector<Index> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), Scalar(0)) {}

  TensorT(std::vector<Index> shape, std::vector<Scalar> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<Index>(data_.size()) != checked_size(shape_)) {
      throw std::invalid_argument("Tensor: data length does not match product(shape)");
    }
  }

  const std::vector<Index>& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return static_cast<Index>(data_.size()); }
  Index dim(Index i) const { return shape_.at(static_cast<size_t>(i)); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::vector<Scalar>& storage() { return data_; }
  const std::vector<Scalar>& storage() const { return data_; }

  Scalar& operator()(Index i) {
    check_rank(1);
    return data_[static_cast<size_t>(i)];
  }
  Scalar operator()(Index i) const {
    check_rank(1);
    return data_[static_cast<size_t>(i)];
  }
  Scalar& operator()(Index r, Index c) {
    check_rank(2);
    return data_[static_cast<size_t>(r * shape_[1] + c)];
  }
  Scalar operator()(Index r, Index c) const {
    check_rank(2);
    return data_[static_cast<size_t>(r * shape_[1] + c)];
  }
  Scalar& operator()(Index r, Index c, Index k) {
    check_rank(3);
    return data_[static_cast<size_t>((r * shape_[1] + c) * shape_[2] + k)];
  }
  Scalar operator()(Index r, Index c, Index k) const {
    check_rank(3);
    return data_[static_cast<size_t>((r * shape_[1] + c) * shape_[2] + k)];
  }

  // Rank-2 view as an Eigen matrix.
  Eigen::Map<const RowMatrix<Scalar>> as_matrix() const {
    check_rank(2);
    return {data_.data(), shape_[0], shape_[1]};
  }
  Eigen::Map<RowMatrix<Scalar>> as_matrix() {
    check_rank(2);
    return {data_.data(), shape_[0], shape_[1]};
  }

  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

  template <typename Other>
  TensorT<Other> cast() const {
    std::vector<Other> out(data_.size());
    for (size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<Other>(data_[i]);
    return TensorT<Other>(shape_, std::move(out));
  }

  static Index checked_size(const std::vector<Index>& shape) {
    Index n = 1;
    for (const Index d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  void check_rank(Index r) const {
    if (rank() != r) {
      throw std::invalid_argument("Tensor: rank " + std::to_string(rank()) +
                                  " access with rank-" + std::to_string(r) + " index");
    }
  }

  std::vector<Index> shape_;
  std::vector<Scalar> data_;
};

using Tensor = TensorT<double>;
using TensorF = TensorT<float>;
using TensorU8 = TensorT<uint8_t>;

}  // namespace mvn

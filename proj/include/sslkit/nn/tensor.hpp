#pragma once

#include "sslkit/common.hpp"

#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

namespace ssl::nn {

// Dense n-dimensional array, row-major, with an optional same-shape gradient
// buffer. Layer parameters keep gradients allocated; activations do not.
template <typename Scalar>
struct Tensor {
  std::vector<int> shape;
  VecX<Scalar> data;
  VecX<Scalar> grad;  // size 0 when absent

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_) : shape(std::move(shape_)) {
    data = VecX<Scalar>::Zero(count(shape));
  }

  static Eigen::Index count(const std::vector<int>& shape) {
    Eigen::Index n = 1;
    for (int d : shape) n *= d;
    return n;
  }

  Eigen::Index size() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  bool has_grad() const { return grad.size() == data.size() && data.size() > 0; }
  void alloc_grad() { grad = VecX<Scalar>::Zero(data.size()); }
  void zero_grad() {
    if (has_grad()) grad.setZero();
  }

  void reshape(std::vector<int> new_shape) {
    if (count(new_shape) != data.size()) throw validation_error("tensor reshape size mismatch");
    shape = std::move(new_shape);
  }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out;
    out.shape = shape;
    out.data = data.template cast<Other>();
    return out;
  }
};

// Named handle to a parameter tensor, used by the optimizer and checkpoints.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Tensor<Scalar>* tensor = nullptr;
};

}  // namespace ssl::nn

#pragma once

#include "sslkit/nn/tensor.hpp"

#include <cmath>
#include <vector>

namespace ssl::nn {

// Adam with bias-corrected first/second moments.
template <typename Scalar>
struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  std::vector<VecX<Scalar>> m, v;

  Adam() = default;
  explicit Adam(double learning_rate) : lr(learning_rate) {}

  void init(const std::vector<ParamRef<Scalar>>& params) {
    m.clear();
    v.clear();
    for (const auto& p : params) {
      m.push_back(VecX<Scalar>::Zero(p.tensor->size()));
      v.push_back(VecX<Scalar>::Zero(p.tensor->size()));
    }
    step_count = 0;
  }

  void step(const std::vector<ParamRef<Scalar>>& params) {
    if (m.size() != params.size()) throw validation_error("adam: state/parameter count mismatch");
    ++step_count;
    const Scalar b1 = Scalar(beta1), b2 = Scalar(beta2);
    const Scalar bc1 = Scalar(1) - std::pow(b1, Scalar(step_count));
    const Scalar bc2 = Scalar(1) - std::pow(b2, Scalar(step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor<Scalar>& t = *params[i].tensor;
      if (!t.has_grad()) throw validation_error("adam: parameter without gradient: " + params[i].name);
      if (!t.grad.allFinite()) {
        throw numeric_error("adam: non-finite gradient for parameter " + params[i].name);
      }
      auto g = t.grad.array();
      m[i] = b1 * m[i].array() + (Scalar(1) - b1) * g;
      v[i] = b2 * v[i].array() + (Scalar(1) - b2) * g.square();
      t.data.array() -=
          Scalar(lr) * (m[i].array() / bc1) / ((v[i].array() / bc2).sqrt() + Scalar(eps));
    }
  }
};

}  // namespace ssl::nn

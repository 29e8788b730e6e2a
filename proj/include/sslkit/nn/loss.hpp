#pragma once

#include "sslkit/nn/tensor.hpp"

#include <utility>
#include <vector>

namespace ssl::nn {

enum class LossMode { Custom, MseOnly };

// Heat-map regression loss: mean squared error over the whole grid plus, in
// Custom mode, a second mean squared error taken over the N true source
// cells only. Inputs are flattened row-major s x s maps.
//
//   L = (1/K) sum_grid (q - qhat)^2 + (1/N) sum_source (q - qhat)^2
//
// Returns the loss and, when grad is non-null, dL/dqhat (added into *grad).
template <typename Scalar>
Scalar custom_loss(const Eigen::Ref<const VecX<Scalar>>& pred,
                   const Eigen::Ref<const VecX<Scalar>>& label, int cells_per_axis,
                   const std::vector<std::pair<int, int>>& source_cells, LossMode mode,
                   VecX<Scalar>* grad = nullptr) {
  const Eigen::Index K = pred.size();
  if (label.size() != K || static_cast<Eigen::Index>(cells_per_axis) * cells_per_axis != K) {
    throw validation_error("loss: shape mismatch");
  }
  if (mode == LossMode::Custom && source_cells.empty()) {
    throw validation_error("loss: label carries no source cells (N = 0)");
  }
  VecX<Scalar> diff = label - pred;
  Scalar loss = diff.squaredNorm() / Scalar(K);
  if (grad) {
    if (grad->size() != K) throw validation_error("loss: gradient buffer size mismatch");
    *grad += Scalar(-2) / Scalar(K) * diff;
  }
  if (mode == LossMode::Custom) {
    const Scalar n = Scalar(source_cells.size());
    for (const auto& [r, c] : source_cells) {
      const Eigen::Index k = static_cast<Eigen::Index>(r) * cells_per_axis + c;
      if (k < 0 || k >= K) throw validation_error("loss: source cell out of range");
      loss += diff(k) * diff(k) / n;
      if (grad) (*grad)(k) += Scalar(-2) / n * diff(k);
    }
  }
  return loss;
}

}  // namespace ssl::nn

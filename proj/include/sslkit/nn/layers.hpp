#pragma once

#include "sslkit/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ssl::nn {

enum class Mode { Train, Eval };

template <typename Scalar>
using MapRM = Eigen::Map<RowMatX<Scalar>>;
template <typename Scalar>
using CMapRM = Eigen::Map<const RowMatX<Scalar>>;

// 3x3 convolution, stride 1, zero padding 1 (spatial size preserved).
// Forward/backward run as one GEMM over the whole batch via im2col.
template <typename Scalar>
struct Conv2d {
  int in_ch = 0, out_ch = 0;
  Tensor<Scalar> weight;  // {out_ch, in_ch, 3, 3}
  Tensor<Scalar> bias;    // {out_ch}

  Conv2d() = default;
  Conv2d(int in_channels, int out_channels) : in_ch(in_channels), out_ch(out_channels) {
    weight = Tensor<Scalar>({out_ch, in_ch, 3, 3});
    bias = Tensor<Scalar>({out_ch});
    weight.alloc_grad();
    bias.alloc_grad();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    if (x.shape.size() != 4 || x.dim(1) != in_ch) throw validation_error("conv2d: bad input shape");
    B_ = x.dim(0);
    H_ = x.dim(2);
    W_ = x.dim(3);
    const Eigen::Index plane = static_cast<Eigen::Index>(H_) * W_;
    const Eigen::Index ncols = B_ * plane;
    cols_.resize(static_cast<Eigen::Index>(in_ch) * 9, ncols);
    im2col(x.data.data(), cols_);

    Tensor<Scalar> y({B_, out_ch, H_, W_});
    CMapRM<Scalar> wmat(weight.data.data(), out_ch, static_cast<Eigen::Index>(in_ch) * 9);
    RowMatX<Scalar> prod = wmat * cols_;
    prod.colwise() += VecX<Scalar>(bias.data);
    // (out_ch x B*plane) -> {B, out_ch, H, W}
#pragma omp parallel for collapse(2) if (workers() > 1)
    for (int b = 0; b < B_; ++b) {
      for (int o = 0; o < out_ch; ++o) {
        std::copy(prod.row(o).data() + b * plane, prod.row(o).data() + (b + 1) * plane,
                  y.data.data() + (static_cast<Eigen::Index>(b) * out_ch + o) * plane);
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Eigen::Index plane = static_cast<Eigen::Index>(H_) * W_;
    RowMatX<Scalar> dy_mat(out_ch, B_ * plane);
#pragma omp parallel for collapse(2) if (workers() > 1)
    for (int b = 0; b < B_; ++b) {
      for (int o = 0; o < out_ch; ++o) {
        std::copy(dy.data.data() + (static_cast<Eigen::Index>(b) * out_ch + o) * plane,
                  dy.data.data() + (static_cast<Eigen::Index>(b) * out_ch + o + 1) * plane,
                  dy_mat.row(o).data() + b * plane);
      }
    }
    MapRM<Scalar> wgrad(weight.grad.data(), out_ch, static_cast<Eigen::Index>(in_ch) * 9);
    wgrad.noalias() += dy_mat * cols_.transpose();
    bias.grad += dy_mat.rowwise().sum();

    CMapRM<Scalar> wmat(weight.data.data(), out_ch, static_cast<Eigen::Index>(in_ch) * 9);
    RowMatX<Scalar> dcols = wmat.transpose() * dy_mat;

    Tensor<Scalar> dx({B_, in_ch, H_, W_});
    col2im(dcols, dx.data.data());
    return dx;
  }

  void register_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
    out.push_back({prefix + ".weight", &weight});
    out.push_back({prefix + ".bias", &bias});
  }

 private:
  int B_ = 0, H_ = 0, W_ = 0;
  RowMatX<Scalar> cols_;  // (in_ch*9) x (B*H*W)

  void im2col(const Scalar* x, RowMatX<Scalar>& cols) const {
    const Eigen::Index plane = static_cast<Eigen::Index>(H_) * W_;
#pragma omp parallel for if (workers() > 1)
    for (int b = 0; b < B_; ++b) {
      for (int c = 0; c < in_ch; ++c) {
        const Scalar* src = x + (static_cast<Eigen::Index>(b) * in_ch + c) * plane;
        for (int di = 0; di < 3; ++di) {
          for (int dj = 0; dj < 3; ++dj) {
            Scalar* dst = cols.row(static_cast<Eigen::Index>(c) * 9 + di * 3 + dj).data() + b * plane;
            for (int i = 0; i < H_; ++i) {
              const int ii = i + di - 1;
              Scalar* drow = dst + static_cast<Eigen::Index>(i) * W_;
              if (ii < 0 || ii >= H_) {
                std::fill(drow, drow + W_, Scalar(0));
                continue;
              }
              const Scalar* srow = src + static_cast<Eigen::Index>(ii) * W_;
              for (int j = 0; j < W_; ++j) {
                const int jj = j + dj - 1;
                drow[j] = (jj >= 0 && jj < W_) ? srow[jj] : Scalar(0);
              }
            }
          }
        }
      }
    }
  }

  void col2im(const RowMatX<Scalar>& dcols, Scalar* dx) const {
    const Eigen::Index plane = static_cast<Eigen::Index>(H_) * W_;
#pragma omp parallel for if (workers() > 1)
    for (int b = 0; b < B_; ++b) {
      for (int c = 0; c < in_ch; ++c) {
        Scalar* dst = dx + (static_cast<Eigen::Index>(b) * in_ch + c) * plane;
        for (int di = 0; di < 3; ++di) {
          for (int dj = 0; dj < 3; ++dj) {
            const Scalar* srow_base =
                dcols.row(static_cast<Eigen::Index>(c) * 9 + di * 3 + dj).data() + b * plane;
            for (int i = 0; i < H_; ++i) {
              const int ii = i + di - 1;
              if (ii < 0 || ii >= H_) continue;
              const Scalar* srow = srow_base + static_cast<Eigen::Index>(i) * W_;
              Scalar* drow = dst + static_cast<Eigen::Index>(ii) * W_;
              for (int j = 0; j < W_; ++j) {
                const int jj = j + dj - 1;
                if (jj >= 0 && jj < W_) drow[jj] += srow[j];
              }
            }
          }
        }
      }
    }
  }
};

// Non-overlapping 2x2 max pooling (stride 2). Gradient routes to the argmax;
// ties resolve to the first element in scan order.
template <typename Scalar>
struct MaxPool2x2 {
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    if (x.shape.size() != 4) throw validation_error("maxpool: expected {B,C,H,W}");
    B_ = x.dim(0);
    C_ = x.dim(1);
    H_ = x.dim(2);
    W_ = x.dim(3);
    if (H_ % 2 != 0 || W_ % 2 != 0) throw validation_error("maxpool: odd spatial dims");
    const int Ho = H_ / 2, Wo = W_ / 2;
    Tensor<Scalar> y({B_, C_, Ho, Wo});
    argmax_.resize(static_cast<std::size_t>(y.size()));
#pragma omp parallel for if (workers() > 1)
    for (int b = 0; b < B_; ++b) {
      for (int c = 0; c < C_; ++c) {
        const Eigen::Index in_base = (static_cast<Eigen::Index>(b) * C_ + c) * H_ * W_;
        const Eigen::Index out_base = (static_cast<Eigen::Index>(b) * C_ + c) * Ho * Wo;
        for (int i = 0; i < Ho; ++i) {
          for (int j = 0; j < Wo; ++j) {
            Eigen::Index best = in_base + (2 * i) * W_ + 2 * j;
            Scalar best_v = x.data(best);
            for (int di = 0; di < 2; ++di) {
              for (int dj = 0; dj < 2; ++dj) {
                const Eigen::Index idx = in_base + (2 * i + di) * W_ + 2 * j + dj;
                if (x.data(idx) > best_v) {
                  best_v = x.data(idx);
                  best = idx;
                }
              }
            }
            y.data(out_base + static_cast<Eigen::Index>(i) * Wo + j) = best_v;
            argmax_[static_cast<std::size_t>(out_base + i * Wo + j)] = best;
          }
        }
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx({B_, C_, H_, W_});
    for (Eigen::Index k = 0; k < dy.size(); ++k) {
      dx.data(argmax_[static_cast<std::size_t>(k)]) += dy.data(k);
    }
    return dx;
  }

 private:
  int B_ = 0, C_ = 0, H_ = 0, W_ = 0;
  std::vector<Eigen::Index> argmax_;
};

// y = x for x > 0, a_c * x otherwise, one learned slope per channel.
// Accepts {B,C,H,W} or {B,C} tensors.
template <typename Scalar>
struct PReLU {
  Tensor<Scalar> slope;  // {C}

  PReLU() = default;
  explicit PReLU(int channels, Scalar init = Scalar(0.25)) {
    slope = Tensor<Scalar>({channels});
    slope.data.setConstant(init);
    slope.alloc_grad();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    const auto [C, plane] = layout(x);
    x_ = x;
    Tensor<Scalar> y(x.shape);
    const int B = x.dim(0);
#pragma omp parallel for collapse(2) if (workers() > 1)
    for (int b = 0; b < B; ++b) {
      for (int c = 0; c < C; ++c) {
        const Scalar a = slope.data(c);
        const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
        auto xs = x.data.segment(base, plane).array();
        y.data.segment(base, plane) = (xs > Scalar(0)).select(xs, a * xs);
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const auto [C, plane] = layout(x_);
    const int B = x_.dim(0);
    Tensor<Scalar> dx(x_.shape);
    for (int c = 0; c < C; ++c) {
      const Scalar a = slope.data(c);
      Scalar da = 0;
      for (int b = 0; b < B; ++b) {
        const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
        auto xs = x_.data.segment(base, plane).array();
        auto ds = dy.data.segment(base, plane).array();
        dx.data.segment(base, plane) = (xs > Scalar(0)).select(ds, a * ds);
        da += ((xs > Scalar(0)).select(VecX<Scalar>::Zero(plane).array(), ds * xs)).sum();
      }
      slope.grad(c) += da;
    }
    return dx;
  }

  void register_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
    out.push_back({prefix + ".slope", &slope});
  }

 private:
  Tensor<Scalar> x_;

  static std::pair<int, Eigen::Index> layout(const Tensor<Scalar>& x) {
    if (x.shape.size() == 4) return {x.dim(1), static_cast<Eigen::Index>(x.dim(2)) * x.dim(3)};
    if (x.shape.size() == 2) return {x.dim(1), 1};
    throw validation_error("prelu: expected {B,C,H,W} or {B,C}");
  }
};

// Per-channel batch normalization over (batch, H, W) with affine scale/shift.
// Train mode uses biased batch statistics and updates running statistics with
// the configured momentum; eval mode uses the running statistics.
template <typename Scalar>
struct BatchNorm2d {
  Tensor<Scalar> gamma, beta;  // {C}
  VecX<Scalar> running_mean, running_var;
  Scalar momentum = Scalar(0.1);
  Scalar eps = Scalar(1e-5);

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels) {
    gamma = Tensor<Scalar>({channels});
    gamma.data.setOnes();
    gamma.alloc_grad();
    beta = Tensor<Scalar>({channels});
    beta.alloc_grad();
    running_mean = VecX<Scalar>::Zero(channels);
    running_var = VecX<Scalar>::Ones(channels);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    if (x.shape.size() != 4) throw validation_error("batchnorm: expected {B,C,H,W}");
    const int B = x.dim(0), C = x.dim(1);
    const Eigen::Index plane = static_cast<Eigen::Index>(x.dim(2)) * x.dim(3);
    if (mode == Mode::Train && B < 2) throw validation_error("batchnorm: train mode needs batch >= 2");
    mode_ = mode;
    shape_ = x.shape;
    const Eigen::Index n = static_cast<Eigen::Index>(B) * plane;

    Tensor<Scalar> y(x.shape);
    if (mode == Mode::Train) {
      xhat_.resize(x.size());
      inv_std_.resize(C);
#pragma omp parallel for if (workers() > 1)
      for (int c = 0; c < C; ++c) {
        Scalar sum = 0, sumsq = 0;
        for (int b = 0; b < B; ++b) {
          const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
          auto xs = x.data.segment(base, plane);
          sum += xs.sum();
          sumsq += xs.squaredNorm();
        }
        const Scalar mean = sum / Scalar(n);
        Scalar var = sumsq / Scalar(n) - mean * mean;
        var = std::max(var, Scalar(0));
        const Scalar istd = Scalar(1) / std::sqrt(var + eps);
        inv_std_(c) = istd;
        running_mean(c) = (Scalar(1) - momentum) * running_mean(c) + momentum * mean;
        running_var(c) = (Scalar(1) - momentum) * running_var(c) + momentum * var;
        for (int b = 0; b < B; ++b) {
          const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
          xhat_.segment(base, plane) = (x.data.segment(base, plane).array() - mean) * istd;
          y.data.segment(base, plane) =
              gamma.data(c) * xhat_.segment(base, plane).array() + beta.data(c);
        }
      }
    } else {
      xhat_.resize(x.size());
      inv_std_.resize(C);
#pragma omp parallel for if (workers() > 1)
      for (int c = 0; c < C; ++c) {
        const Scalar istd = Scalar(1) / std::sqrt(running_var(c) + eps);
        inv_std_(c) = istd;
        for (int b = 0; b < B; ++b) {
          const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
          xhat_.segment(base, plane) =
              (x.data.segment(base, plane).array() - running_mean(c)) * istd;
          y.data.segment(base, plane) =
              gamma.data(c) * xhat_.segment(base, plane).array() + beta.data(c);
        }
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const int B = shape_[0], C = shape_[1];
    const Eigen::Index plane = static_cast<Eigen::Index>(shape_[2]) * shape_[3];
    const Eigen::Index n = static_cast<Eigen::Index>(B) * plane;
    Tensor<Scalar> dx(shape_);
    if (mode_ == Mode::Eval) {
      // Running statistics are constants here, so only the affine path flows.
      for (int c = 0; c < C; ++c) {
        for (int b = 0; b < B; ++b) {
          const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
          gamma.grad(c) +=
              (dy.data.segment(base, plane).array() * xhat_.segment(base, plane).array()).sum();
          beta.grad(c) += dy.data.segment(base, plane).sum();
          dx.data.segment(base, plane) =
              (gamma.data(c) * inv_std_(c)) * dy.data.segment(base, plane);
        }
      }
      return dx;
    }
#pragma omp parallel for if (workers() > 1)
    for (int c = 0; c < C; ++c) {
      Scalar sum_dy = 0, sum_dy_xhat = 0;
      for (int b = 0; b < B; ++b) {
        const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
        sum_dy += dy.data.segment(base, plane).sum();
        sum_dy_xhat += (dy.data.segment(base, plane).array() * xhat_.segment(base, plane).array()).sum();
      }
      gamma.grad(c) += sum_dy_xhat;
      beta.grad(c) += sum_dy;
      const Scalar g = gamma.data(c);
      const Scalar mean_dy = sum_dy / Scalar(n);
      const Scalar mean_dy_xhat = sum_dy_xhat / Scalar(n);
      for (int b = 0; b < B; ++b) {
        const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * plane;
        dx.data.segment(base, plane) =
            (g * inv_std_(c)) *
            (dy.data.segment(base, plane).array() - mean_dy -
             xhat_.segment(base, plane).array() * mean_dy_xhat);
      }
    }
    return dx;
  }

  void register_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
    out.push_back({prefix + ".gamma", &gamma});
    out.push_back({prefix + ".beta", &beta});
  }

 private:
  VecX<Scalar> xhat_;
  VecX<Scalar> inv_std_;
  std::vector<int> shape_;
  Mode mode_ = Mode::Train;
};

// Affine map y = x W^T + b on {B, in} tensors.
template <typename Scalar>
struct Linear {
  int in_features = 0, out_features = 0;
  Tensor<Scalar> weight;  // {out, in}
  Tensor<Scalar> bias;    // {out}

  Linear() = default;
  Linear(int in_f, int out_f) : in_features(in_f), out_features(out_f) {
    weight = Tensor<Scalar>({out_f, in_f});
    bias = Tensor<Scalar>({out_f});
    weight.alloc_grad();
    bias.alloc_grad();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    if (x.shape.size() != 2 || x.dim(1) != in_features) {
      throw validation_error("linear: bad input shape");
    }
    x_ = x;
    const int B = x.dim(0);
    Tensor<Scalar> y({B, out_features});
    CMapRM<Scalar> xm(x.data.data(), B, in_features);
    CMapRM<Scalar> wm(weight.data.data(), out_features, in_features);
    MapRM<Scalar> ym(y.data.data(), B, out_features);
    ym.noalias() = xm * wm.transpose();
    ym.rowwise() += bias.data.transpose();
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const int B = x_.dim(0);
    CMapRM<Scalar> dym(dy.data.data(), B, out_features);
    CMapRM<Scalar> xm(x_.data.data(), B, in_features);
    CMapRM<Scalar> wm(weight.data.data(), out_features, in_features);
    MapRM<Scalar> wg(weight.grad.data(), out_features, in_features);
    wg.noalias() += dym.transpose() * xm;
    bias.grad += dym.colwise().sum().transpose();
    Tensor<Scalar> dx({B, in_features});
    MapRM<Scalar> dxm(dx.data.data(), B, in_features);
    dxm.noalias() = dym * wm;
    return dx;
  }

  void register_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
    out.push_back({prefix + ".weight", &weight});
    out.push_back({prefix + ".bias", &bias});
  }

 private:
  Tensor<Scalar> x_;
};

}  // namespace ssl::nn

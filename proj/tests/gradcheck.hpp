#pragma once

// Central finite-difference gradient verification used by the unit tests and
// the acceptance suite. Runs in 64-bit. A coordinate passes when the
// analytic and numeric derivatives agree to the relative tolerance, with an
// absolute fallback for near-zero gradients (the FD cancellation floor).

#include "sslkit/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gradcheck {

struct Eval {
  double value = 0;
  // Hash of every non-smooth branch taken during the evaluation (activation
  // signs, pooling argmax picks). Coordinates whose +h/-h evaluations take
  // different branches are skipped: the FD quotient is meaningless across a
  // kink.
  std::uint64_t signature = 0;
};

struct Result {
  double max_rel_err = 0;
  int checked = 0;
  int skipped = 0;
};

inline double rel_err(double analytic, double numeric) {
  const double err = std::abs(analytic - numeric);
  if (err <= 1e-8) return 0.0;
  return err / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

inline void hash_mix(std::uint64_t& h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

inline void hash_sign_pattern(std::uint64_t& h, const ssl::VecX<double>& data) {
  std::uint64_t word = 0;
  int bits = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    word = (word << 1) | (data(i) > 0 ? 1u : 0u);
    if (++bits == 64) {
      hash_mix(h, word);
      word = 0;
      bits = 0;
    }
  }
  if (bits > 0) hash_mix(h, word);
}

// Argmax pick per non-overlapping 2x2 window of a {B,C,H,W} tensor.
inline void hash_pool_choices(std::uint64_t& h, const ssl::nn::Tensor<double>& t) {
  const int B = t.dim(0), C = t.dim(1), H = t.dim(2), W = t.dim(3);
  std::uint64_t word = 0;
  int picks = 0;
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const Eigen::Index base = (static_cast<Eigen::Index>(b) * C + c) * H * W;
      for (int i = 0; i < H; i += 2) {
        for (int j = 0; j < W; j += 2) {
          int best = 0;
          double best_v = t.data(base + static_cast<Eigen::Index>(i) * W + j);
          for (int k = 1; k < 4; ++k) {
            const double v = t.data(base + (i + k / 2) * static_cast<Eigen::Index>(W) + j + k % 2);
            if (v > best_v) {
              best_v = v;
              best = k;
            }
          }
          word = (word << 2) | static_cast<unsigned>(best);
          if (++picks == 32) {
            hash_mix(h, word);
            word = 0;
            picks = 0;
          }
        }
      }
    }
  }
  if (picks > 0) hash_mix(h, word);
}

// Checks d(eval)/d(data[i]) against `analytic` on `n_coords` random
// coordinates of one array.
template <typename EvalFn>
Result check_array(EvalFn&& eval, double* data, Eigen::Index size, const double* analytic,
                   int n_coords, std::mt19937_64& rng, double h = 1e-5) {
  Result res;
  std::uniform_int_distribution<Eigen::Index> pick(0, size - 1);
  for (int k = 0; k < n_coords; ++k) {
    const Eigen::Index i = pick(rng);
    const double saved = data[i];
    data[i] = saved + h;
    const Eval plus = eval();
    data[i] = saved - h;
    const Eval minus = eval();
    data[i] = saved;
    if (plus.signature != minus.signature) {
      ++res.skipped;
      continue;
    }
    const double numeric = (plus.value - minus.value) / (2.0 * h);
    res.max_rel_err = std::max(res.max_rel_err, rel_err(analytic[i], numeric));
    ++res.checked;
  }
  return res;
}

inline void merge(Result& into, const Result& part) {
  into.max_rel_err = std::max(into.max_rel_err, part.max_rel_err);
  into.checked += part.checked;
  into.skipped += part.skipped;
}

}  // namespace gradcheck

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssl {

inline constexpr int kFormatVersion = 1;

using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error hierarchy. The CLI maps validation errors to exit code 2 and
// everything else to exit code 1.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class validation_error : public error {
 public:
  explicit validation_error(const std::string& msg) : error(msg) {}
};

class sampling_error : public error {
 public:
  explicit sampling_error(const std::string& msg) : error(msg) {}
};

class io_error : public error {
 public:
  explicit io_error(const std::string& msg) : error(msg) {}
};

class singularity_error : public error {
 public:
  explicit singularity_error(const std::string& msg) : error(msg) {}
};

class numeric_error : public error {
 public:
  explicit numeric_error(const std::string& msg) : error(msg) {}
};

class config_mismatch_error : public error {
 public:
  explicit config_mismatch_error(const std::string& msg) : error(msg) {}
};

class integrity_error : public error {
 public:
  explicit integrity_error(const std::string& msg) : error(msg) {}
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent RNG streams derived from one user-facing seed. Every random
// consumer takes (seed, stream, index) so batches parallelize without
// sharing generator state.
enum class SeedStream : std::uint64_t {
  Scene = 1,
  Noise = 2,
  Init = 3,
  Shuffle = 4,
  Eval = 5,
  Misc = 6,
};

inline std::uint64_t derive_seed(std::uint64_t base, SeedStream stream, std::uint64_t index = 0) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(stream) ^ splitmix64(index)));
}

// Thread budget for internal parallelism (Eigen products and OpenMP loops).
// Results are bitwise reproducible at workers == 1.
void set_workers(int n);
int workers();

}  // namespace ssl

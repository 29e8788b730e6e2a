#pragma once

#include "sslkit/common.hpp"
#include "sslkit/scene.hpp"

#include <cstdint>

namespace ssl {

struct PhysicalConstants {
  double sound_speed = 343.0;        // m/s
  double reference_pressure = 20e-6; // Pa
};

// Complex pressure at every microphone, row-major over the array.
struct ComplexPressureFrame {
  CVec values;
  int mics_per_axis = 0;
};

// SPL matrix in dB re 20 uPa. `clamped_cells` counts elements whose
// magnitude hit the cancellation floor before the log.
struct SplFrame {
  Mat values;
  int clamped_cells = 0;
  bool clamped() const { return clamped_cells > 0; }
};

struct NoiseConfig {
  double snr_db = 30.0;
  std::uint64_t rng_seed = 0;
  bool enabled = true;
  // When set, noise is injected on the raw SPL matrix instead of the
  // Z-scored input.
  bool on_raw_spl = false;
};

// Free-field monopole: p = Q * exp(-j*2*pi*f*r/c0) / (4*pi*r).
Complex monopole_pressure(const MonopoleSource& source, const Vec3& mic, double frequency,
                          const PhysicalConstants& consts = {});

// Superposition of all scene sources at every microphone.
ComplexPressureFrame synthesize(const Scene& scene, const PhysicalConstants& consts = {});

// p_m = 20*log10(|p| / p_ref), reshaped t x t row-major. Magnitudes below
// floor_pa (perfect cancellation) are clamped and counted.
SplFrame to_spl(const ComplexPressureFrame& frame, const PhysicalConstants& consts = {},
                double floor_pa = 1e-12);

// Zero-mean Gaussian field with sigma_noise = sigma * 10^(-snr_db/20).
Mat gaussian_noise_field(Eigen::Index rows, Eigen::Index cols, double sigma, std::uint64_t seed);

// Adds calibrated noise: sigma_noise is tied to the population standard
// deviation of `signal` through the SNR. Throws numeric_error when the
// signal has zero spread.
Mat add_noise(const Mat& signal, const NoiseConfig& cfg);

double population_stddev(const Mat& m);

}  // namespace ssl

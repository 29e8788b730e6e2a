#include "sslkit/field.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ssl {

Complex monopole_pressure(const MonopoleSource& source, const Vec3& mic, double frequency,
                          const PhysicalConstants& consts) {
  const double r = (mic - source.position).norm();
  if (r <= 0) throw singularity_error("source coincides with microphone (r = 0)");
  const double phase = 2.0 * std::numbers::pi * frequency * r / consts.sound_speed;
  return source.strength * std::polar(1.0, -phase) / (4.0 * std::numbers::pi * r);
}

ComplexPressureFrame synthesize(const Scene& scene, const PhysicalConstants& consts) {
  const auto mics = mic_positions(scene.array);
  ComplexPressureFrame frame;
  frame.mics_per_axis = scene.array.mics_per_axis;
  frame.values = CVec::Zero(static_cast<Eigen::Index>(mics.size()));
  for (std::size_t m = 0; m < mics.size(); ++m) {
    Complex sum = 0;
    for (const auto& src : scene.sources) {
      sum += monopole_pressure(src, mics[m], scene.frequency, consts);
    }
    frame.values(static_cast<Eigen::Index>(m)) = sum;
  }
  return frame;
}

SplFrame to_spl(const ComplexPressureFrame& frame, const PhysicalConstants& consts,
                double floor_pa) {
  const int t = frame.mics_per_axis;
  if (t <= 0 || frame.values.size() != static_cast<Eigen::Index>(t) * t) {
    throw validation_error("pressure frame size does not match mics_per_axis^2");
  }
  SplFrame spl;
  spl.values.resize(t, t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      double mag = std::abs(frame.values(static_cast<Eigen::Index>(i) * t + j));
      if (mag < floor_pa) {
        mag = floor_pa;
        ++spl.clamped_cells;
      }
      spl.values(i, j) = 20.0 * std::log10(mag / consts.reference_pressure);
    }
  }
  return spl;
}

double population_stddev(const Mat& m) {
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size()));
}

Mat gaussian_noise_field(Eigen::Index rows, Eigen::Index cols, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat field(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) field(i, j) = sigma * dist(rng);
  return field;
}

Mat add_noise(const Mat& signal, const NoiseConfig& cfg) {
  if (!cfg.enabled || std::isinf(cfg.snr_db)) return signal;
  if (!std::isfinite(cfg.snr_db)) throw validation_error("snr_db must be finite or +inf");
  const double sigma_signal = population_stddev(signal);
  if (sigma_signal <= 0) {
    throw numeric_error("signal has zero standard deviation; SNR-calibrated noise undefined");
  }
  const double sigma_noise = sigma_signal * std::pow(10.0, -cfg.snr_db / 20.0);
  return signal + gaussian_noise_field(signal.rows(), signal.cols(), sigma_noise, cfg.rng_seed);
}

}  // namespace ssl

#include "sslkit/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace ssl {

namespace {

HeatMap power_to_map(const Vec& power, int s) {
  HeatMap map;
  map.values.resize(s, s);
  const double peak = power.maxCoeff();
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      double v = power(static_cast<Eigen::Index>(i) * s + j);
      map.values(i, j) = peak > 0 ? std::max(v, 0.0) / peak : 0.0;
    }
  }
  return map;
}

}  // namespace

SteeringSet steering(const ScanGrid& grid, const ArrayGeometry& array, double frequency,
                     const PhysicalConstants& consts) {
  const auto cells = cell_centers(grid);
  const auto mics = mic_positions(array);
  const auto K = static_cast<Eigen::Index>(cells.size());
  const auto M = static_cast<Eigen::Index>(mics.size());
  SteeringSet S;
  S.frequency = frequency;
  S.cells_per_axis = grid.cells_per_axis;
  S.g.resize(K, M);
  S.w.resize(K, M);
  const double wavenumber_scale = 2.0 * std::numbers::pi * frequency / consts.sound_speed;
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index m = 0; m < M; ++m) {
      const double r = (mics[static_cast<std::size_t>(m)] - cells[static_cast<std::size_t>(k)]).norm();
      if (r <= 0) throw singularity_error("grid cell coincides with a microphone");
      S.g(k, m) = std::polar(1.0 / (4.0 * std::numbers::pi * r), -wavenumber_scale * r);
    }
    S.w.row(k) = S.g.row(k) / S.g.row(k).squaredNorm();
  }
  return S;
}

CrossSpectralMatrix csm(const ComplexPressureFrame& frame) {
  CrossSpectralMatrix C;
  C.values.noalias() = frame.values * frame.values.adjoint();
  return C;
}

DasResult das(const CrossSpectralMatrix& C, const SteeringSet& S, const DasOptions& opts) {
  const Eigen::Index M = S.w.cols();
  if (C.values.rows() != M || C.values.cols() != M) {
    throw validation_error("das: CSM size does not match steering set");
  }
  CMat Cw = C.values;
  if (opts.diag_removal) Cw.diagonal().setZero();
  DasResult out;
  // b_k = w_k^H C w_k
  CMat tmp = S.w.conjugate() * Cw;  // K x M
  out.power = (tmp.cwiseProduct(S.w)).rowwise().sum().real();
  out.map = power_to_map(out.power, S.cells_per_axis);
  return out;
}

CleanScResult clean_sc(const CrossSpectralMatrix& C, const SteeringSet& S,
                       const CleanScOptions& opts) {
  const int s = S.cells_per_axis;
  CleanScResult out;
  CMat D = C.values;  // degraded CSM
  out.initial_norm = D.norm();
  std::map<Eigen::Index, double> merged;

  double prev = out.initial_norm;
  for (int it = 0; it < opts.max_iters; ++it) {
    DasResult dirty = das({D}, S, {});
    Eigen::Index kmax = 0;
    const double bmax = dirty.power.maxCoeff(&kmax);
    if (!(bmax > 0)) break;

    // Source-coherent component of the peak: h = D w / b_max.
    CVec w = S.w.row(kmax).transpose();
    CVec h = D * w / bmax;
    CMat Dnext = D - opts.loop_gain * bmax * (h * h.adjoint());
    const double norm = Dnext.norm();
    if (norm > prev) break;  // degenerate step: residual stopped decreasing

    merged[kmax] += opts.loop_gain * bmax;
    D = std::move(Dnext);
    out.residual_norms.push_back(norm);
    const bool tiny_decrease = (prev - norm) < opts.stop_threshold * prev;
    prev = norm;
    if (tiny_decrease) break;
  }

  Vec power = Vec::Zero(static_cast<Eigen::Index>(s) * s);
  for (const auto& [k, p] : merged) power(k) = p;
  out.map = power_to_map(power, s);
  for (const auto& [k, p] : merged) {
    out.components.push_back({static_cast<int>(k / s), static_cast<int>(k % s), p});
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const auto& a, const auto& b) { return a.power > b.power; });
  return out;
}

Mat damas_psf(const SteeringSet& S) {
  // A_kl = |w_k^H g_l|^2
  CMat coh = S.w.conjugate() * S.g.transpose();  // K x K
  return coh.cwiseAbs2();
}

DamasResult damas(const Vec& dirty_power, const SteeringSet& S, const DamasOptions& opts) {
  const Eigen::Index K = S.w.rows();
  if (dirty_power.size() != K) throw validation_error("damas: map size does not match steering set");
  const Mat A = damas_psf(S);
  DamasResult out;
  out.solution = Vec::Zero(K);
  Vec& x = out.solution;
  for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
    const bool reverse = opts.alternate_sweep_order && (sweep % 2 == 1);
    for (Eigen::Index step = 0; step < K; ++step) {
      const Eigen::Index k = reverse ? K - 1 - step : step;
      const double away = A.row(k).dot(x) - A(k, k) * x(k);
      x(k) = std::max(0.0, (dirty_power(k) - away) / A(k, k));
    }
    out.residual_norms.push_back((A * x - dirty_power).norm());
  }
  out.map = power_to_map(x, S.cells_per_axis);
  return out;
}

ComplexPressureFrame add_csm_input_noise(const ComplexPressureFrame& frame, double snr_db,
                                         std::uint64_t seed) {
  const Eigen::Index M = frame.values.size();
  const double mean_power = frame.values.squaredNorm() / static_cast<double>(M);
  const double noise_power = mean_power * std::pow(10.0, -snr_db / 10.0);
  const double sigma = std::sqrt(noise_power / 2.0);  // per real/imag part
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  ComplexPressureFrame noisy = frame;
  for (Eigen::Index m = 0; m < M; ++m) {
    noisy.values(m) += Complex(sigma * dist(rng), sigma * dist(rng));
  }
  return noisy;
}

}  // namespace ssl

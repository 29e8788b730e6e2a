#pragma once

#include "sslkit/common.hpp"
#include "sslkit/datagen.hpp"
#include "sslkit/field.hpp"
#include "sslkit/scene.hpp"

#include <vector>

namespace ssl {

// Monopole transfer entries g_km = exp(-j*2*pi*f*r_km/c0) / (4*pi*r_km) from
// every grid cell k to every microphone m, plus the normalized steering
// weights w_k = g_k / |g_k|^2 used by the beamformers.
struct SteeringSet {
  CMat g;  // K x M
  CMat w;  // K x M
  double frequency = 0;
  int cells_per_axis = 0;
};

struct CrossSpectralMatrix {
  CMat values;  // M x M Hermitian, p * p^H for a monochromatic frame
};

struct DasOptions {
  bool diag_removal = false;
};

struct DasResult {
  Vec power;    // raw beamformer output b_k = w_k^H C w_k, length K
  HeatMap map;  // power normalized to [0,1] by its maximum
};

struct CleanScOptions {
  double loop_gain = 0.6;
  int max_iters = 50;
  double stop_threshold = 0.01;  // minimum relative residual decrease per iteration
};

struct CleanScComponent {
  int row = 0, col = 0;
  double power = 0;
};

struct CleanScResult {
  HeatMap map;  // clean component map, normalized to [0,1]
  std::vector<CleanScComponent> components;  // merged per cell, strongest first
  std::vector<double> residual_norms;        // Frobenius norm after each iteration
  double initial_norm = 0;
};

struct DamasOptions {
  int sweeps = 100;
  bool alternate_sweep_order = true;
};

struct DamasResult {
  Vec solution;  // nonnegative source powers, length K
  HeatMap map;   // solution normalized to [0,1]
  std::vector<double> residual_norms;  // ||A x - b|| after each sweep
};

SteeringSet steering(const ScanGrid& grid, const ArrayGeometry& array, double frequency,
                     const PhysicalConstants& consts = {});

CrossSpectralMatrix csm(const ComplexPressureFrame& frame);

// Conventional delay-and-sum map over the scanning grid.
DasResult das(const CrossSpectralMatrix& C, const SteeringSet& S, const DasOptions& opts = {});

// CLEAN-SC deconvolution: iteratively removes the source-coherent component
// of the strongest map peak from the cross-spectral matrix.
CleanScResult clean_sc(const CrossSpectralMatrix& C, const SteeringSet& S,
                       const CleanScOptions& opts = {});

// DAMAS deconvolution: Gauss-Seidel sweeps with nonnegativity clamping on
// A x = b, where A_kl = |w_k^H g_l|^2 is the point spread matrix.
DamasResult damas(const Vec& dirty_power, const SteeringSet& S, const DamasOptions& opts = {});

// Point spread matrix used by damas; exposed for the synthetic inversion
// oracle.
Mat damas_psf(const SteeringSet& S);

// Per-channel complex Gaussian noise for baseline robustness experiments:
// sigma is set from the mean microphone power and the SNR.
ComplexPressureFrame add_csm_input_noise(const ComplexPressureFrame& frame, double snr_db,
                                         std::uint64_t seed);

}  // namespace ssl

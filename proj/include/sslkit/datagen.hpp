#pragma once

#include "sslkit/common.hpp"
#include "sslkit/field.hpp"
#include "sslkit/scene.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ssl {

// s x s source-existence map in [0, 1]. Labels carry the true source cells
// (each holding the exact value 1); predictions leave source_cells empty.
struct HeatMap {
  Mat values;
  std::vector<std::pair<int, int>> source_cells;
};

// 3x3 Gaussian blur applied to source markers, normalized so the peak stays
// exactly 1. Overlapping footprints combine by element-wise maximum.
struct BlurConfig {
  double sigma = 1.0;
};

struct SampleMeta {
  float frequency = 0;
  float distance = 0;
  float n_sources = 0;
};

// One training sample in storage precision (32-bit floats, row-major).
struct Sample {
  Eigen::MatrixXf input;  // t x t preprocessed SPL
  Eigen::MatrixXf label;  // s x s heat map
  std::vector<std::pair<int, int>> source_cells;
  SampleMeta meta;
  bool degenerate = false;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  std::int64_t sample_count = 0;
  int t = 0;
  int s = 0;
  int shard_size = 4096;
  std::uint64_t seed = 0;
  ScenarioRanges ranges;
  NoiseConfig noise;
  BlurConfig blur;
  struct Shard {
    std::string file;
    std::int64_t count = 0;
    std::uint32_t crc = 0;
  };
  std::vector<Shard> shards;
};

// Column-packed dataset as used by training and evaluation.
struct Dataset {
  int t = 0;
  int s = 0;
  Eigen::MatrixXf inputs;  // (t*t) x n, one flattened row-major image per column
  Eigen::MatrixXf labels;  // (s*s) x n
  std::vector<SampleMeta> meta;
  std::vector<std::vector<std::pair<int, int>>> source_cells;

  std::int64_t size() const { return inputs.cols(); }
  void append(const Sample& sample);
};

struct ZScoreResult {
  Mat values;
  bool degenerate = false;
};

struct NormalizeResult {
  Mat values;
  bool degenerate = false;
};

// (x - mean) / population_std; zero matrix with the degenerate flag when the
// spread is below 1e-12.
ZScoreResult zscore(const Mat& x);

// (x - min) / (max - min); zero matrix with the degenerate flag when max == min.
NormalizeResult normalize(const Mat& x);

HeatMap make_label(const Scene& scene, const ScanGrid& grid, const BlurConfig& blur = {});

// Full input pipeline for one scenario index: sample_scene -> synthesize ->
// to_spl -> zscore -> noise -> normalize, paired with the blurred label.
// Deterministic given (seed, index).
Sample generate_sample(std::uint64_t seed, std::int64_t index, const ScenarioRanges& ranges,
                       const NoiseConfig& noise, const BlurConfig& blur = {},
                       const PhysicalConstants& consts = {});

// In-memory dataset of `count` samples, identical to what generate_dataset
// writes for the same arguments.
Dataset generate_samples(std::int64_t count, const ScenarioRanges& ranges, const NoiseConfig& noise,
                         std::uint64_t seed, const BlurConfig& blur = {});

// Writes shards of 4096 records plus manifest.json under out_dir.
// Record layout: [input t*t floats][label s*s floats][f, Z, N], IEEE-754
// 32-bit little-endian.
DatasetManifest generate_dataset(std::int64_t count, const ScenarioRanges& ranges,
                                 const NoiseConfig& noise, std::uint64_t seed,
                                 const std::string& out_dir, const BlurConfig& blur = {});

DatasetManifest read_manifest(const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace ssl

#pragma once

#include "sslkit/common.hpp"
#include "sslkit/config.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ssl {

// Square microphone array in the plane z = plane_z, centered on the z axis.
// Microphones are point sensors spanning the full aperture, so the spacing
// is endpoint-inclusive: side_length / (mics_per_axis - 1).
struct ArrayGeometry {
  int mics_per_axis = 12;
  double side_length = 0.3;
  double plane_z = 0.0;

  int mic_count() const { return mics_per_axis * mics_per_axis; }
  double spacing() const { return side_length / (mics_per_axis - 1); }
  void validate() const;
};

// Square scanning grid parallel to the array at offset `distance`. Cells are
// subregions that tile the square, so centers sit at cell midpoints with
// pitch side_length / cells_per_axis.
struct ScanGrid {
  int cells_per_axis = 22;
  double side_length = 1.0;
  double distance = 0.85;

  int cell_count() const { return cells_per_axis * cells_per_axis; }
  double pitch() const { return side_length / cells_per_axis; }
  void validate() const;
};

struct MonopoleSource {
  Vec3 position = Vec3::Zero();
  double strength = 1.0;
};

enum class Layout { Planar, Cylindrical };

std::string layout_name(Layout layout);
Layout layout_from_name(const std::string& name);

// One synthetic measurement scenario: the ground truth of a sample.
struct Scene {
  std::vector<MonopoleSource> sources;
  double frequency = 500.0;
  ArrayGeometry array;
  ScanGrid grid;
  Layout layout = Layout::Planar;
  double cylinder_radius = 0.5;

  void validate() const;
};

// Randomization ranges for scenario sampling plus the fixed geometry.
struct ScenarioRanges {
  int n_sources_min = 1;
  int n_sources_max = 6;
  double freq_min_hz = 200.0;
  double freq_max_hz = 1000.0;
  double z_min_m = 0.70;
  double z_max_m = 1.00;
  Layout layout = Layout::Planar;
  double cylinder_radius_m = 0.5;
  bool snap_to_centers = false;
  ArrayGeometry array;
  ScanGrid grid;  // grid.distance is overwritten per scene by the sampled Z

  void validate() const;
  static ScenarioRanges from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
};

// Microphone positions in row-major order (row index varies slowest).
std::vector<Vec3> mic_positions(const ArrayGeometry& array);

// Cell-center positions in row-major order at the grid plane.
std::vector<Vec3> cell_centers(const ScanGrid& grid);

// Deterministic scenario sampling. Source (x, y) is uniform over the
// scanning square, rejected until all pairwise separations are at least two
// cell pitches. Throws sampling_error when the rejection budget runs out.
Scene sample_scene(std::uint64_t rng_seed, const ScenarioRanges& ranges);

// Index (row, col) of the cell whose center is nearest to the source's
// (x, y); exact ties resolve toward the smaller index.
std::pair<int, int> source_cell_index(const MonopoleSource& source, const ScanGrid& grid);

// Depth of a cylindrical-layout source at lateral offset x: the cylinder
// axis is vertical, tangent to the scanning plane at its midline.
double cylinder_depth(double x, double grid_distance, double radius);

}  // namespace ssl

#include "sslkit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ssl {

void ArrayGeometry::validate() const {
  if (mics_per_axis < 2) throw validation_error("mics_per_axis must be >= 2");
  if (!(side_length > 0)) throw validation_error("array side_length must be positive");
}

void ScanGrid::validate() const {
  if (cells_per_axis < 1) throw validation_error("cells_per_axis must be >= 1");
  if (!(side_length > 0)) throw validation_error("grid side_length must be positive");
  if (!(distance > 0)) throw validation_error("grid distance must be positive");
}

std::string layout_name(Layout layout) {
  return layout == Layout::Planar ? "planar" : "cylindrical";
}

Layout layout_from_name(const std::string& name) {
  if (name == "planar") return Layout::Planar;
  if (name == "cylindrical") return Layout::Cylindrical;
  throw validation_error("unknown layout '" + name + "' (expected planar|cylindrical)");
}

double cylinder_depth(double x, double grid_distance, double radius) {
  if (std::abs(x) > radius) {
    throw validation_error("source lateral offset exceeds cylinder radius");
  }
  return grid_distance + (radius - std::sqrt(radius * radius - x * x));
}

void Scene::validate() const {
  array.validate();
  grid.validate();
  if (sources.empty()) throw validation_error("scene has no sources");
  const double half = grid.side_length / 2;
  for (const auto& src : sources) {
    if (!(src.strength > 0)) throw validation_error("source strength must be positive");
    if (std::abs(src.position.x()) > half || std::abs(src.position.y()) > half) {
      throw validation_error("source (x, y) outside the scanning square");
    }
    if (layout == Layout::Planar) {
      if (std::abs(src.position.z() - grid.distance) > 1e-9) {
        throw validation_error("planar source depth must equal the grid distance");
      }
    } else {
      double want = cylinder_depth(src.position.x(), grid.distance, cylinder_radius);
      if (std::abs(src.position.z() - want) > 1e-9) {
        throw validation_error("cylindrical source depth inconsistent with the cylinder surface");
      }
    }
  }
}

void ScenarioRanges::validate() const {
  array.validate();
  if (grid.cells_per_axis < 1) throw validation_error("cells_per_axis must be >= 1");
  if (!(grid.side_length > 0)) throw validation_error("grid side_length must be positive");
  if (n_sources_min < 1 || n_sources_max < n_sources_min) {
    throw validation_error("invalid source-count range");
  }
  if (!(freq_min_hz > 0) || freq_max_hz < freq_min_hz) {
    throw validation_error("invalid frequency range");
  }
  if (!(z_min_m > 0) || z_max_m < z_min_m) throw validation_error("invalid distance range");
  if (layout == Layout::Cylindrical && cylinder_radius_m < grid.side_length / 2) {
    throw validation_error("cylinder radius must be >= half the grid side");
  }
}

ScenarioRanges ScenarioRanges::from_config(const KeyValueConfig& cfg) {
  ScenarioRanges r;
  r.n_sources_min = static_cast<int>(cfg.get_int("n_sources_min", r.n_sources_min));
  r.n_sources_max = static_cast<int>(cfg.get_int("n_sources_max", r.n_sources_max));
  r.freq_min_hz = cfg.get_double("freq_min_hz", r.freq_min_hz);
  r.freq_max_hz = cfg.get_double("freq_max_hz", r.freq_max_hz);
  r.z_min_m = cfg.get_double("z_min_m", r.z_min_m);
  r.z_max_m = cfg.get_double("z_max_m", r.z_max_m);
  r.layout = layout_from_name(cfg.get_string("layout", layout_name(r.layout)));
  r.cylinder_radius_m = cfg.get_double("cylinder_radius_m", r.cylinder_radius_m);
  r.snap_to_centers = cfg.get_bool("snap_to_centers", r.snap_to_centers);
  r.array.mics_per_axis = static_cast<int>(cfg.get_int("mics_per_axis", r.array.mics_per_axis));
  r.array.side_length = cfg.get_double("array_side_m", r.array.side_length);
  r.grid.cells_per_axis = static_cast<int>(cfg.get_int("cells_per_axis", r.grid.cells_per_axis));
  r.grid.side_length = cfg.get_double("grid_side_m", r.grid.side_length);
  r.validate();
  return r;
}

KeyValueConfig ScenarioRanges::to_config() const {
  KeyValueConfig cfg;
  cfg.set_int("n_sources_min", n_sources_min);
  cfg.set_int("n_sources_max", n_sources_max);
  cfg.set_double("freq_min_hz", freq_min_hz);
  cfg.set_double("freq_max_hz", freq_max_hz);
  cfg.set_double("z_min_m", z_min_m);
  cfg.set_double("z_max_m", z_max_m);
  cfg.set("layout", layout_name(layout));
  cfg.set_double("cylinder_radius_m", cylinder_radius_m);
  cfg.set_bool("snap_to_centers", snap_to_centers);
  cfg.set_int("mics_per_axis", array.mics_per_axis);
  cfg.set_double("array_side_m", array.side_length);
  cfg.set_int("cells_per_axis", grid.cells_per_axis);
  cfg.set_double("grid_side_m", grid.side_length);
  return cfg;
}

std::vector<Vec3> mic_positions(const ArrayGeometry& array) {
  array.validate();
  const int t = array.mics_per_axis;
  const double h = array.spacing();
  const double half = array.side_length / 2;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(t) * t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      out.emplace_back(-half + j * h, -half + i * h, array.plane_z);
    }
  }
  return out;
}

std::vector<Vec3> cell_centers(const ScanGrid& grid) {
  grid.validate();
  const int s = grid.cells_per_axis;
  const double p = grid.pitch();
  const double half = grid.side_length / 2;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(s) * s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      out.emplace_back(-half + (j + 0.5) * p, -half + (i + 0.5) * p, grid.distance);
    }
  }
  return out;
}

namespace {

// Nearest cell index along one axis; ties go to the smaller index.
int nearest_axis_index(double v, int s, double side) {
  const double p = side / s;
  const double half = side / 2;
  auto center = [&](int k) { return -half + (k + 0.5) * p; };
  int guess = static_cast<int>(std::floor((v + half) / p));
  guess = std::clamp(guess, 0, s - 1);
  int best = -1;
  double best_d = 0;
  for (int k = std::max(0, guess - 1); k <= std::min(s - 1, guess + 1); ++k) {
    double d = std::abs(v - center(k));
    if (best < 0 || d < best_d) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

std::pair<int, int> source_cell_index(const MonopoleSource& source, const ScanGrid& grid) {
  grid.validate();
  const double half = grid.side_length / 2;
  const double x = source.position.x(), y = source.position.y();
  if (std::abs(x) > half || std::abs(y) > half) {
    throw validation_error("source (x, y) outside the scanning square");
  }
  return {nearest_axis_index(y, grid.cells_per_axis, grid.side_length),
          nearest_axis_index(x, grid.cells_per_axis, grid.side_length)};
}

Scene sample_scene(std::uint64_t rng_seed, const ScenarioRanges& ranges) {
  ranges.validate();
  std::mt19937_64 rng(rng_seed);

  Scene scene;
  scene.array = ranges.array;
  scene.grid = ranges.grid;
  scene.layout = ranges.layout;
  scene.cylinder_radius = ranges.cylinder_radius_m;

  std::uniform_int_distribution<int> n_dist(ranges.n_sources_min, ranges.n_sources_max);
  const int n = n_dist(rng);
  std::uniform_real_distribution<double> f_dist(ranges.freq_min_hz, ranges.freq_max_hz);
  scene.frequency = f_dist(rng);
  std::uniform_real_distribution<double> z_dist(ranges.z_min_m, ranges.z_max_m);
  scene.grid.distance = z_dist(rng);

  const double half = scene.grid.side_length / 2;
  const double min_sep = 2.0 * scene.grid.pitch();
  std::uniform_real_distribution<double> xy_dist(-half, half);
  const auto centers = ranges.snap_to_centers ? cell_centers(scene.grid) : std::vector<Vec3>{};

  std::vector<Eigen::Vector2d> placed;
  int budget = 10000;
  while (static_cast<int>(placed.size()) < n) {
    if (budget-- <= 0) {
      throw sampling_error("rejection budget exhausted placing " + std::to_string(n) +
                           " sources with min separation " + std::to_string(min_sep) + " m");
    }
    double x = xy_dist(rng);
    double y = xy_dist(rng);
    if (ranges.snap_to_centers) {
      auto [r, c] = source_cell_index({Vec3(x, y, scene.grid.distance), 1.0}, scene.grid);
      x = centers[static_cast<std::size_t>(r) * scene.grid.cells_per_axis + c].x();
      y = centers[static_cast<std::size_t>(r) * scene.grid.cells_per_axis + c].y();
    }
    bool ok = true;
    for (const auto& q : placed) {
      if ((Eigen::Vector2d(x, y) - q).norm() < min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) placed.emplace_back(x, y);
  }

  scene.sources.reserve(placed.size());
  for (const auto& q : placed) {
    double z = scene.layout == Layout::Planar
                   ? scene.grid.distance
                   : cylinder_depth(q.x(), scene.grid.distance, scene.cylinder_radius);
    scene.sources.push_back({Vec3(q.x(), q.y(), z), 1.0});
  }
  return scene;
}

}  // namespace ssl

#include "sslkit/scene.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace ssl;

TEST_CASE("mic positions: 2x2 array sits at the aperture corners") {
  ArrayGeometry g{2, 0.3, 0.0};
  auto mics = mic_positions(g);
  REQUIRE(mics.size() == 4);
  CHECK(mics[0] == Vec3(-0.15, -0.15, 0.0));
  CHECK(mics[1] == Vec3(0.15, -0.15, 0.0));
  CHECK(mics[2] == Vec3(-0.15, 0.15, 0.0));
  CHECK(mics[3] == Vec3(0.15, 0.15, 0.0));
}

TEST_CASE("mic positions: t=12 gives 144 mics with endpoint-inclusive spacing") {
  ArrayGeometry g;  // defaults: 12 mics per axis, 0.3 m side
  auto mics = mic_positions(g);
  REQUIRE(mics.size() == 144);
  const double h = 0.3 / 11.0;
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j + 1 < 12; ++j) {
      const auto& a = mics[static_cast<std::size_t>(i) * 12 + j];
      const auto& b = mics[static_cast<std::size_t>(i) * 12 + j + 1];
      CHECK((b - a).norm() == doctest::Approx(h).epsilon(1e-14));
    }
  }
  CHECK(mics.front().x() == doctest::Approx(-0.15));
  CHECK(mics.back().x() == doctest::Approx(0.15));
  // deterministic ordering
  auto again = mic_positions(g);
  for (std::size_t k = 0; k < mics.size(); ++k) CHECK(mics[k] == again[k]);
}

TEST_CASE("cell centers: pitch, count, degenerate single cell") {
  ScanGrid grid;  // 22 cells, 1.0 m side
  grid.distance = 0.85;
  auto cells = cell_centers(grid);
  REQUIRE(cells.size() == 484);
  const double p = 1.0 / 22.0;
  CHECK((cells[1] - cells[0]).norm() == doctest::Approx(p).epsilon(1e-14));
  CHECK(cells[0].x() == doctest::Approx(-0.5 + 0.5 * p));
  CHECK(cells[0].z() == 0.85);

  ScanGrid single{1, 1.0, 0.7};
  auto one = cell_centers(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Vec3(0.0, 0.0, 0.7));
}

TEST_CASE("source_cell_index: centers, corners, ties, bounds") {
  ScanGrid grid;
  grid.distance = 0.85;
  auto cells = cell_centers(grid);

  SUBCASE("exact center maps to its own cell") {
    MonopoleSource src{cells[5 * 22 + 13], 1.0};
    auto [r, c] = source_cell_index(src, grid);
    CHECK(r == 5);
    CHECK(c == 13);
  }
  SUBCASE("scanning-square corner maps to the corner cell") {
    MonopoleSource src{Vec3(-0.5, -0.5, 0.85), 1.0};
    auto rc = source_cell_index(src, grid);
    CHECK(rc == std::pair<int, int>(0, 0));
    MonopoleSource far_corner{Vec3(0.5, 0.5, 0.85), 1.0};
    CHECK(source_cell_index(far_corner, grid) == std::pair<int, int>(21, 21));
  }
  SUBCASE("generic point agrees with the brute-force nearest-center scan") {
    MonopoleSource src{Vec3(0.001, -0.002, 0.85), 1.0};
    int best = 0;
    double best_d = 1e300;
    for (int k = 0; k < 484; ++k) {
      double d = std::hypot(src.position.x() - cells[static_cast<std::size_t>(k)].x(),
                            src.position.y() - cells[static_cast<std::size_t>(k)].y());
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    auto [r, c] = source_cell_index(src, grid);
    CHECK(r == best / 22);
    CHECK(c == best % 22);
  }
  SUBCASE("tie at a cell boundary resolves to the smaller index") {
    // pitch 0.25 is exact in binary; the boundary between cells 1 and 2 lies
    // at exactly 0, equidistant from both centers
    ScanGrid g4{4, 1.0, 0.85};
    MonopoleSource src{Vec3(0.0, 0.0, 0.85), 1.0};
    auto [r, c] = source_cell_index(src, g4);
    CHECK(r == 1);
    CHECK(c == 1);
  }
  SUBCASE("out-of-square position is rejected") {
    MonopoleSource src{Vec3(0.501, 0.0, 0.85), 1.0};
    CHECK_THROWS_AS(source_cell_index(src, grid), validation_error);
  }
}

TEST_CASE("sample_scene: determinism and fixed source count") {
  ScenarioRanges ranges;
  Scene a = sample_scene(7, ranges);
  Scene b = sample_scene(7, ranges);
  REQUIRE(a.sources.size() == b.sources.size());
  CHECK(a.frequency == b.frequency);
  CHECK(a.grid.distance == b.grid.distance);
  for (std::size_t i = 0; i < a.sources.size(); ++i) {
    CHECK(a.sources[i].position == b.sources[i].position);
  }

  ScenarioRanges one = ranges;
  one.n_sources_min = one.n_sources_max = 1;
  CHECK(sample_scene(3, one).sources.size() == 1);
}

TEST_CASE("sample_scene: uniform-distribution statistics of Z over 1e4 draws") {
  ScenarioRanges ranges;
  double zmin = 1e300, zmax = -1e300, zsum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Scene sc = sample_scene(1000 + static_cast<std::uint64_t>(i), ranges);
    zmin = std::min(zmin, sc.grid.distance);
    zmax = std::max(zmax, sc.grid.distance);
    zsum += sc.grid.distance;
  }
  CHECK(zmin >= 0.70);
  CHECK(zmax <= 1.00);
  CHECK(zsum / n == doctest::Approx(0.85).epsilon(0.0118));  // 0.85 +- 0.01
}

TEST_CASE("sample_scene: pairwise separation and unique label cells") {
  ScenarioRanges ranges;
  ranges.n_sources_min = ranges.n_sources_max = 6;
  for (int trial = 0; trial < 200; ++trial) {
    Scene sc = sample_scene(static_cast<std::uint64_t>(trial), ranges);
    const double min_sep = 2.0 * sc.grid.pitch();
    std::set<std::pair<int, int>> cells;
    for (std::size_t i = 0; i < sc.sources.size(); ++i) {
      cells.insert(source_cell_index(sc.sources[i], sc.grid));
      for (std::size_t j = i + 1; j < sc.sources.size(); ++j) {
        double d = std::hypot(sc.sources[i].position.x() - sc.sources[j].position.x(),
                              sc.sources[i].position.y() - sc.sources[j].position.y());
        CHECK(d >= min_sep);
      }
    }
    CHECK(cells.size() == sc.sources.size());
  }
}

TEST_CASE("sample_scene: impossible separation constraint exhausts the budget") {
  ScenarioRanges ranges;
  ranges.grid.cells_per_axis = 2;  // min separation = full side length
  ranges.n_sources_min = ranges.n_sources_max = 6;
  CHECK_THROWS_AS(sample_scene(1, ranges), sampling_error);
}

TEST_CASE("sample_scene: snapped sources sit exactly on cell centers") {
  ScenarioRanges ranges;
  ranges.snap_to_centers = true;
  auto centers = cell_centers(ranges.grid);
  Scene sc = sample_scene(42, ranges);
  for (const auto& src : sc.sources) {
    auto [r, c] = source_cell_index(src, sc.grid);
    const auto& ctr = centers[static_cast<std::size_t>(r) * 22 + c];
    CHECK(src.position.x() == doctest::Approx(ctr.x()).epsilon(1e-15));
    CHECK(src.position.y() == doctest::Approx(ctr.y()).epsilon(1e-15));
  }
}

TEST_CASE("cylindrical layout: depth follows the cylinder, (x, y) unchanged") {
  ScenarioRanges ranges;
  ranges.layout = Layout::Cylindrical;
  for (int trial = 0; trial < 50; ++trial) {
    Scene sc = sample_scene(static_cast<std::uint64_t>(trial), ranges);
    for (const auto& src : sc.sources) {
      const double want =
          sc.grid.distance +
          (sc.cylinder_radius - std::sqrt(sc.cylinder_radius * sc.cylinder_radius -
                                          src.position.x() * src.position.x()));
      CHECK(src.position.z() == doctest::Approx(want).epsilon(1e-12));
      CHECK(src.position.z() >= sc.grid.distance);
      // projection to the grid plane preserves (x, y): the label cell depends
      // only on those coordinates
      CHECK_NOTHROW(source_cell_index(src, sc.grid));
    }
  }
}

TEST_CASE("cylinder radius smaller than the half-grid is rejected") {
  ScenarioRanges ranges;
  ranges.layout = Layout::Cylindrical;
  ranges.cylinder_radius_m = 0.3;
  CHECK_THROWS_AS(ranges.validate(), validation_error);
}

TEST_CASE("scenario ranges: config round-trip") {
  ScenarioRanges r;
  r.n_sources_max = 4;
  r.freq_min_hz = 300;
  r.layout = Layout::Cylindrical;
  r.cylinder_radius_m = 0.6;
  r.snap_to_centers = true;
  auto cfg = r.to_config();
  auto back = ScenarioRanges::from_config(cfg);
  CHECK(back.n_sources_max == 4);
  CHECK(back.freq_min_hz == 300);
  CHECK(back.layout == Layout::Cylindrical);
  CHECK(back.cylinder_radius_m == 0.6);
  CHECK(back.snap_to_centers);
  CHECK(back.array.mics_per_axis == 12);
  CHECK(back.grid.cells_per_axis == 22);
}

TEST_CASE("key-value config parsing") {
  auto cfg = KeyValueConfig::parse("a = 1\n# comment\nb = hello  # trailing\n\n c=2.5 \n");
  CHECK(cfg.get_int("a", 0) == 1);
  CHECK(cfg.get_string("b", "") == "hello");
  CHECK(cfg.get_double("c", 0) == 2.5);
  CHECK(cfg.get_int("missing", 9) == 9);
  CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), validation_error);
  CHECK_THROWS_AS(cfg.get_int("b", 0), validation_error);
}

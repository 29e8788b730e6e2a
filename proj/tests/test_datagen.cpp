#include "sslkit/datagen.hpp"

#include "sslkit/io.hpp"
#include "sslkit/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace ssl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("zscore: direct computation on [1, 2, 3]") {
  Mat x(1, 3);
  x << 1, 2, 3;
  auto r = zscore(x);
  REQUIRE_FALSE(r.degenerate);
  CHECK(r.values(0, 0) == doctest::Approx(-1.2247448713915890).epsilon(1e-12));
  CHECK(r.values(0, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(r.values(0, 2) == doctest::Approx(1.2247448713915890).epsilon(1e-12));
}

TEST_CASE("zscore: constant input degenerates to zeros") {
  Mat x = Mat::Constant(4, 4, 3.7);
  auto r = zscore(x);
  CHECK(r.degenerate);
  CHECK(r.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zscore: output mean 0 and population std 1") {
  for (int trial = 0; trial < 20; ++trial) {
    Mat x = 40.0 * Mat::Random(12, 12);
    auto r = zscore(x);
    REQUIRE_FALSE(r.degenerate);
    CHECK(std::abs(r.values.mean()) <= 1e-12);
    CHECK(population_stddev(r.values) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize: direct computation on [-1, 0, 3]") {
  Mat x(1, 3);
  x << -1, 0, 3;
  auto r = normalize(x);
  REQUIRE_FALSE(r.degenerate);
  CHECK(r.values(0, 0) == 0.0);
  CHECK(r.values(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r.values(0, 2) == 1.0);
}

TEST_CASE("normalize: [0,1] data with exact endpoints is unchanged") {
  Mat x(2, 2);
  x << 0.0, 0.25, 0.75, 1.0;
  auto r = normalize(x);
  CHECK((r.values - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalize: min exactly 0 and max exactly 1; constant flags") {
  Mat x = Mat::Random(9, 9) * 123.0;
  auto r = normalize(x);
  CHECK(r.values.minCoeff() == 0.0);
  CHECK(r.values.maxCoeff() == 1.0);
  CHECK(normalize(Mat::Constant(3, 3, 5.0)).degenerate);
}

TEST_CASE("make_label: interior source footprint has the closed-form weights") {
  Scene sc;
  sc.grid.distance = 0.85;
  auto centers = cell_centers(sc.grid);
  sc.sources.push_back({centers[static_cast<std::size_t>(10) * 22 + 7], 1.0});
  auto label = make_label(sc, sc.grid);
  CHECK(label.values(10, 7) == 1.0);
  CHECK(label.values(9, 7) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
  CHECK(label.values(10, 6) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
  CHECK(label.values(9, 6) == doctest::Approx(0.3678794411714423).epsilon(1e-15));
  CHECK(label.values(11, 8) == doctest::Approx(0.3678794411714423).epsilon(1e-15));
  CHECK(label.values(8, 7) == 0.0);
  REQUIRE(label.source_cells.size() == 1);
  CHECK(label.source_cells[0] == std::pair<int, int>(10, 7));
}

TEST_CASE("make_label: corner footprint is truncated, peak stays 1") {
  Scene sc;
  sc.grid.distance = 0.85;
  sc.sources.push_back({Vec3(-0.5, -0.5, 0.85), 1.0});
  auto label = make_label(sc, sc.grid);
  CHECK(label.values(0, 0) == 1.0);
  CHECK(label.values(0, 1) == doctest::Approx(0.6065306597126334));
  CHECK(label.values(1, 1) == doctest::Approx(0.3678794411714423));
  CHECK(label.values.maxCoeff() == 1.0);
}

TEST_CASE("make_label: overlapping footprints combine by element-wise max") {
  Scene sc;
  sc.grid.distance = 0.85;
  auto centers = cell_centers(sc.grid);
  sc.sources.push_back({centers[static_cast<std::size_t>(5) * 22 + 5], 1.0});
  sc.sources.push_back({centers[static_cast<std::size_t>(5) * 22 + 7], 1.0});
  auto label = make_label(sc, sc.grid);
  // the cell between the two sources is an edge neighbor of both
  CHECK(label.values(5, 6) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
  CHECK(label.values(5, 5) == 1.0);
  CHECK(label.values(5, 7) == 1.0);
  CHECK(label.values.maxCoeff() == 1.0);
}

TEST_CASE("labels always yield exactly N extraction peaks") {
  ScenarioRanges ranges;
  for (int trial = 0; trial < 100; ++trial) {
    Scene sc = sample_scene(9000 + static_cast<std::uint64_t>(trial), ranges);
    auto label = make_label(sc, sc.grid);
    auto peaks = get_source_coordinates(label.values);
    CHECK(peaks.size() == sc.sources.size());
    CHECK(peaks == label.source_cells);
  }
}

TEST_CASE("generate_sample: pipeline output is normalized to [0, 1]") {
  ScenarioRanges ranges;
  NoiseConfig noise{30.0, 0, true, false};
  for (int i = 0; i < 20; ++i) {
    Sample s = generate_sample(77, i, ranges, noise);
    REQUIRE_FALSE(s.degenerate);
    CHECK(s.input.minCoeff() == 0.0f);
    CHECK(s.input.maxCoeff() == 1.0f);
    CHECK(s.meta.n_sources >= 1);
    CHECK(static_cast<std::size_t>(s.meta.n_sources) == s.source_cells.size());
  }
}

TEST_CASE("generate_dataset: count 0 gives an empty manifest") {
  auto dir = temp_dir("sslkit_ds_empty");
  ScenarioRanges ranges;
  auto man = generate_dataset(0, ranges, NoiseConfig{30, 0, false, false}, 1, dir.string());
  CHECK(man.sample_count == 0);
  CHECK(man.shards.empty());
  auto ds = load_dataset(dir.string());
  CHECK(ds.size() == 0);
  fs::remove_all(dir);
}

TEST_CASE("generate_dataset: same seed twice is byte-identical") {
  ScenarioRanges ranges;
  NoiseConfig noise{30.0, 0, true, false};
  auto dir_a = temp_dir("sslkit_ds_a");
  auto dir_b = temp_dir("sslkit_ds_b");
  generate_dataset(300, ranges, noise, 42, dir_a.string());
  generate_dataset(300, ranges, noise, 42, dir_b.string());
  auto bytes_a = read_file_bytes((dir_a / "shard_00000.bin").string());
  auto bytes_b = read_file_bytes((dir_b / "shard_00000.bin").string());
  CHECK(bytes_a == bytes_b);
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("generate_dataset: shard boundaries and bit-exact round trip") {
  ScenarioRanges ranges;
  ranges.n_sources_max = 3;
  NoiseConfig noise{30.0, 0, true, false};
  auto dir = temp_dir("sslkit_ds_shards");
  const std::int64_t count = 5000;  // 4096 + 904
  auto man = generate_dataset(count, ranges, noise, 5, dir.string());
  REQUIRE(man.shards.size() == 2);
  CHECK(man.shards[0].count == 4096);
  CHECK(man.shards[1].count == 904);

  Dataset from_disk = load_dataset(dir.string());
  Dataset in_memory = generate_samples(count, ranges, noise, 5);
  REQUIRE(from_disk.size() == count);
  CHECK(from_disk.inputs == in_memory.inputs);
  CHECK(from_disk.labels == in_memory.labels);
  for (std::int64_t i = 0; i < count; ++i) {
    CHECK(from_disk.meta[static_cast<std::size_t>(i)].frequency ==
          in_memory.meta[static_cast<std::size_t>(i)].frequency);
    CHECK(from_disk.source_cells[static_cast<std::size_t>(i)] ==
          in_memory.source_cells[static_cast<std::size_t>(i)]);
  }
  fs::remove_all(dir);
}

TEST_CASE("load_dataset: corrupted shard fails the checksum") {
  ScenarioRanges ranges;
  auto dir = temp_dir("sslkit_ds_corrupt");
  generate_dataset(10, ranges, NoiseConfig{30, 0, false, false}, 3, dir.string());
  {
    std::fstream f(dir / "shard_00000.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(100);
    f.put('\x7f');
  }
  CHECK_THROWS_AS(load_dataset(dir.string()), integrity_error);
  fs::remove_all(dir);
}

TEST_CASE("noise placement: z-scored injection perturbs; raw-SPL placement is equivalent") {
  ScenarioRanges ranges;
  ranges.n_sources_min = ranges.n_sources_max = 2;
  NoiseConfig clean{30.0, 0, false, false};
  NoiseConfig on_z{30.0, 0, true, false};
  NoiseConfig on_raw{30.0, 0, true, true};
  Sample a = generate_sample(11, 0, ranges, clean);
  Sample b = generate_sample(11, 0, ranges, on_z);
  Sample c = generate_sample(11, 0, ranges, on_raw);
  CHECK((a.input - b.input).cwiseAbs().maxCoeff() > 0.0f);
  // Both zscore and normalize are invariant to positive affine maps, so
  // SNR-calibrated noise before or after the z-score yields the same
  // normalized input up to rounding.
  CHECK((b.input - c.input).cwiseAbs().maxCoeff() <= 1e-5f);
  CHECK(a.label == b.label);
  CHECK(a.label == c.label);
}

#include "sslkit/datagen.hpp"

#include "sslkit/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "dataset/checkpoint formats assume a little-endian host");

namespace ssl {

namespace fs = std::filesystem;
using nlohmann::json;

ZScoreResult zscore(const Mat& x) {
  constexpr double eps = 1e-12;
  ZScoreResult r;
  const double sigma = population_stddev(x);
  if (sigma <= eps) {
    r.values = Mat::Zero(x.rows(), x.cols());
    r.degenerate = true;
    return r;
  }
  r.values = (x.array() - x.mean()) / sigma;
  return r;
}

NormalizeResult normalize(const Mat& x) {
  NormalizeResult r;
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  if (!(hi > lo)) {
    r.values = Mat::Zero(x.rows(), x.cols());
    r.degenerate = true;
    return r;
  }
  r.values = (x.array() - lo) / (hi - lo);
  return r;
}

HeatMap make_label(const Scene& scene, const ScanGrid& grid, const BlurConfig& blur) {
  const int s = grid.cells_per_axis;
  HeatMap map;
  map.values = Mat::Zero(s, s);
  const double sig2 = blur.sigma * blur.sigma;
  for (const auto& src : scene.sources) {
    auto [r, c] = source_cell_index(src, grid);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= s || cc < 0 || cc >= s) continue;
        double w = std::exp(-(dr * dr + dc * dc) / (2.0 * sig2));
        map.values(rr, cc) = std::max(map.values(rr, cc), w);
      }
    }
    map.source_cells.emplace_back(r, c);
  }
  std::sort(map.source_cells.begin(), map.source_cells.end());
  // Source cells are exactly 1 regardless of blur overlap.
  for (const auto& [r, c] : map.source_cells) map.values(r, c) = 1.0;
  return map;
}

Sample generate_sample(std::uint64_t seed, std::int64_t index, const ScenarioRanges& ranges,
                       const NoiseConfig& noise, const BlurConfig& blur,
                       const PhysicalConstants& consts) {
  const auto idx = static_cast<std::uint64_t>(index);
  Scene scene = sample_scene(derive_seed(seed, SeedStream::Scene, idx), ranges);
  SplFrame spl = to_spl(synthesize(scene, consts), consts);

  NoiseConfig local = noise;
  local.rng_seed = derive_seed(seed, SeedStream::Noise, idx);

  Sample sample;
  Mat stage = spl.values;
  if (local.enabled && local.on_raw_spl) stage = add_noise(stage, local);
  ZScoreResult z = zscore(stage);
  sample.degenerate = z.degenerate;
  stage = z.values;
  if (local.enabled && !local.on_raw_spl && !sample.degenerate) stage = add_noise(stage, local);
  NormalizeResult n = normalize(stage);
  sample.degenerate = sample.degenerate || n.degenerate;

  HeatMap label = make_label(scene, scene.grid, blur);
  sample.input = n.values.cast<float>();
  sample.label = label.values.cast<float>();
  sample.source_cells = std::move(label.source_cells);
  sample.meta.frequency = static_cast<float>(scene.frequency);
  sample.meta.distance = static_cast<float>(scene.grid.distance);
  sample.meta.n_sources = static_cast<float>(scene.sources.size());
  return sample;
}

namespace {

void flatten_rowmajor(const Eigen::MatrixXf& m, float* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) *out++ = m(i, j);
}

}  // namespace

void Dataset::append(const Sample& sample) {
  const Eigen::Index col = inputs.cols();
  inputs.conservativeResize(sample.input.size(), col + 1);
  labels.conservativeResize(sample.label.size(), col + 1);
  // Row-major flattening to match the on-disk record layout.
  flatten_rowmajor(sample.input, inputs.col(col).data());
  flatten_rowmajor(sample.label, labels.col(col).data());
  meta.push_back(sample.meta);
  source_cells.push_back(sample.source_cells);
}

namespace {

json ranges_to_json(const ScenarioRanges& r) {
  return json{{"n_sources_min", r.n_sources_min},
              {"n_sources_max", r.n_sources_max},
              {"freq_min_hz", r.freq_min_hz},
              {"freq_max_hz", r.freq_max_hz},
              {"z_min_m", r.z_min_m},
              {"z_max_m", r.z_max_m},
              {"layout", layout_name(r.layout)},
              {"cylinder_radius_m", r.cylinder_radius_m},
              {"snap_to_centers", r.snap_to_centers},
              {"mics_per_axis", r.array.mics_per_axis},
              {"array_side_m", r.array.side_length},
              {"cells_per_axis", r.grid.cells_per_axis},
              {"grid_side_m", r.grid.side_length}};
}

ScenarioRanges ranges_from_json(const json& j) {
  ScenarioRanges r;
  r.n_sources_min = j.at("n_sources_min").get<int>();
  r.n_sources_max = j.at("n_sources_max").get<int>();
  r.freq_min_hz = j.at("freq_min_hz").get<double>();
  r.freq_max_hz = j.at("freq_max_hz").get<double>();
  r.z_min_m = j.at("z_min_m").get<double>();
  r.z_max_m = j.at("z_max_m").get<double>();
  r.layout = layout_from_name(j.at("layout").get<std::string>());
  r.cylinder_radius_m = j.at("cylinder_radius_m").get<double>();
  r.snap_to_centers = j.at("snap_to_centers").get<bool>();
  r.array.mics_per_axis = j.at("mics_per_axis").get<int>();
  r.array.side_length = j.at("array_side_m").get<double>();
  r.grid.cells_per_axis = j.at("cells_per_axis").get<int>();
  r.grid.side_length = j.at("grid_side_m").get<double>();
  return r;
}

std::string shard_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "shard_%05d.bin", index);
  return buf;
}

}  // namespace

Dataset generate_samples(std::int64_t count, const ScenarioRanges& ranges, const NoiseConfig& noise,
                         std::uint64_t seed, const BlurConfig& blur) {
  ranges.validate();
  const int t = ranges.array.mics_per_axis;
  const int s = ranges.grid.cells_per_axis;
  Dataset ds;
  ds.t = t;
  ds.s = s;
  ds.inputs.resize(t * t, count);
  ds.labels.resize(s * s, count);
  ds.meta.resize(static_cast<std::size_t>(count));
  ds.source_cells.resize(static_cast<std::size_t>(count));

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64) if (workers() > 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      Sample sample = generate_sample(seed, i, ranges, noise, blur);
      flatten_rowmajor(sample.input, ds.inputs.col(i).data());
      flatten_rowmajor(sample.label, ds.labels.col(i).data());
      ds.meta[static_cast<std::size_t>(i)] = sample.meta;
      ds.source_cells[static_cast<std::size_t>(i)] = std::move(sample.source_cells);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return ds;
}

DatasetManifest generate_dataset(std::int64_t count, const ScenarioRanges& ranges,
                                 const NoiseConfig& noise, std::uint64_t seed,
                                 const std::string& out_dir, const BlurConfig& blur) {
  ranges.validate();
  fs::create_directories(out_dir);
  DatasetManifest man;
  man.sample_count = count;
  man.t = ranges.array.mics_per_axis;
  man.s = ranges.grid.cells_per_axis;
  man.seed = seed;
  man.ranges = ranges;
  man.noise = noise;
  man.blur = blur;

  const std::int64_t record_floats = static_cast<std::int64_t>(man.t) * man.t + man.s * man.s + 3;
  const int n_shards = static_cast<int>((count + man.shard_size - 1) / man.shard_size);
  man.shards.resize(static_cast<std::size_t>(n_shards));

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) if (workers() > 1)
  for (int sh = 0; sh < n_shards; ++sh) {
    try {
      const std::int64_t begin = static_cast<std::int64_t>(sh) * man.shard_size;
      const std::int64_t end = std::min(count, begin + man.shard_size);
      std::vector<float> buf(static_cast<std::size_t>((end - begin) * record_floats));
      float* p = buf.data();
      for (std::int64_t i = begin; i < end; ++i) {
        Sample sample = generate_sample(seed, i, ranges, noise, blur);
        flatten_rowmajor(sample.input, p);
        p += sample.input.size();
        flatten_rowmajor(sample.label, p);
        p += sample.label.size();
        *p++ = sample.meta.frequency;
        *p++ = sample.meta.distance;
        *p++ = sample.meta.n_sources;
      }
      const std::string name = shard_name(sh);
      const std::size_t bytes = buf.size() * sizeof(float);
      write_file_bytes((fs::path(out_dir) / name).string(), buf.data(), bytes);
      man.shards[static_cast<std::size_t>(sh)] = {name, end - begin, crc32(buf.data(), bytes)};
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  json j{{"kind", "sslkit-dataset"},
         {"format_version", man.format_version},
         {"sample_count", man.sample_count},
         {"t", man.t},
         {"s", man.s},
         {"shard_size", man.shard_size},
         {"seed", man.seed},
         {"record_floats", record_floats},
         {"ranges", ranges_to_json(man.ranges)},
         {"noise",
          {{"enabled", man.noise.enabled},
           {"snr_db", man.noise.snr_db},
           {"on_raw_spl", man.noise.on_raw_spl}}},
         {"blur_sigma", man.blur.sigma}};
  json shards = json::array();
  for (const auto& sh : man.shards) {
    shards.push_back({{"file", sh.file}, {"count", sh.count}, {"crc32", sh.crc}});
  }
  j["shards"] = shards;
  std::ofstream out(fs::path(out_dir) / "manifest.json");
  if (!out) throw io_error("cannot write manifest under " + out_dir);
  out << j.dump(2) << "\n";
  return man;
}

DatasetManifest read_manifest(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw io_error("no manifest.json under " + dir);
  json j;
  in >> j;
  if (j.value("kind", "") != "sslkit-dataset") throw io_error("not a dataset manifest: " + dir);
  if (j.at("format_version").get<int>() != kFormatVersion) {
    throw io_error("unsupported dataset format version in " + dir);
  }
  DatasetManifest man;
  man.sample_count = j.at("sample_count").get<std::int64_t>();
  man.t = j.at("t").get<int>();
  man.s = j.at("s").get<int>();
  man.shard_size = j.at("shard_size").get<int>();
  man.seed = j.at("seed").get<std::uint64_t>();
  man.ranges = ranges_from_json(j.at("ranges"));
  man.noise.enabled = j.at("noise").at("enabled").get<bool>();
  man.noise.snr_db = j.at("noise").at("snr_db").get<double>();
  man.noise.on_raw_spl = j.at("noise").at("on_raw_spl").get<bool>();
  man.blur.sigma = j.at("blur_sigma").get<double>();
  for (const auto& sh : j.at("shards")) {
    man.shards.push_back(
        {sh.at("file").get<std::string>(), sh.at("count").get<std::int64_t>(),
         sh.at("crc32").get<std::uint32_t>()});
  }
  return man;
}

Dataset load_dataset(const std::string& dir) {
  const DatasetManifest man = read_manifest(dir);
  const std::int64_t record_floats =
      static_cast<std::int64_t>(man.t) * man.t + man.s * man.s + 3;
  Dataset ds;
  ds.t = man.t;
  ds.s = man.s;
  ds.inputs.resize(man.t * man.t, man.sample_count);
  ds.labels.resize(man.s * man.s, man.sample_count);
  ds.meta.resize(static_cast<std::size_t>(man.sample_count));
  ds.source_cells.resize(static_cast<std::size_t>(man.sample_count));

  std::int64_t at = 0;
  for (const auto& sh : man.shards) {
    const auto bytes = read_file_bytes((fs::path(dir) / sh.file).string());
    if (crc32(bytes.data(), bytes.size()) != sh.crc) {
      throw integrity_error("shard checksum mismatch: " + sh.file);
    }
    if (static_cast<std::int64_t>(bytes.size()) != sh.count * record_floats * 4) {
      throw integrity_error("shard size mismatch: " + sh.file);
    }
    const float* p = reinterpret_cast<const float*>(bytes.data());
    for (std::int64_t k = 0; k < sh.count; ++k, ++at) {
      std::copy(p, p + man.t * man.t, ds.inputs.col(at).data());
      p += man.t * man.t;
      std::copy(p, p + man.s * man.s, ds.labels.col(at).data());
      p += man.s * man.s;
      ds.meta[static_cast<std::size_t>(at)] = {p[0], p[1], p[2]};
      p += 3;
      auto& cells = ds.source_cells[static_cast<std::size_t>(at)];
      for (int r = 0; r < man.s; ++r)
        for (int c = 0; c < man.s; ++c)
          if (ds.labels(static_cast<Eigen::Index>(r) * man.s + c, at) == 1.0f)
            cells.emplace_back(r, c);
    }
  }
  if (at != man.sample_count) throw integrity_error("manifest/shard sample count mismatch");
  return ds;
}

}  // namespace ssl

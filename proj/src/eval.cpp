#include "sslkit/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace ssl {

using nlohmann::json;

std::string sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::BySourceCount: return "by_source_count";
    case SweepKind::ByFrequency: return "by_frequency";
    case SweepKind::ByDistance: return "by_distance";
  }
  return "unknown";
}

SweepKind sweep_kind_from_name(const std::string& name) {
  if (name == "by_source_count") return SweepKind::BySourceCount;
  if (name == "by_frequency") return SweepKind::ByFrequency;
  if (name == "by_distance") return SweepKind::ByDistance;
  throw validation_error("unknown sweep protocol '" + name +
                         "' (expected by_source_count|by_frequency|by_distance)");
}

std::vector<double> default_sweep_values(SweepKind kind) {
  switch (kind) {
    case SweepKind::BySourceCount: return {1, 2, 3, 4, 5, 6};
    case SweepKind::ByFrequency: return {200, 400, 600, 800, 1000};
    case SweepKind::ByDistance: return {0.70, 0.775, 0.85, 0.925, 1.00};
  }
  return {};
}

AccuracyHistogram accuracy_histogram(const std::vector<double>& accuracies) {
  AccuracyHistogram h;
  std::map<long long, int> fine;  // keyed by round(acc * 1e9)
  for (double a : accuracies) {
    ++fine[std::llround(a * 1e9)];
    const int bucket = static_cast<int>(std::lround(std::clamp(a, 0.0, 1.0) * 4.0));
    ++h.buckets[static_cast<std::size_t>(bucket)];
    ++h.total;
  }
  for (const auto& [key, count] : fine) {
    h.value_counts.emplace_back(static_cast<double>(key) / 1e9, count);
  }
  return h;
}

namespace {

ScenarioRanges ranges_for_condition(const SweepProtocol& protocol, double value) {
  ScenarioRanges r = protocol.base;
  switch (protocol.kind) {
    case SweepKind::BySourceCount:
      r.n_sources_min = r.n_sources_max = static_cast<int>(std::llround(value));
      break;
    case SweepKind::ByFrequency:
      r.freq_min_hz = r.freq_max_hz = value;
      break;
    case SweepKind::ByDistance:
      r.z_min_m = r.z_max_m = value;
      break;
  }
  return r;
}

std::vector<double> condition_accuracies(Network<float>& net, const Dataset& ds,
                                         const PeakExtractionConfig& peaks) {
  const int s = net.cfg.s;
  const int K = net.cfg.output_features();
  std::vector<double> accs;
  accs.reserve(static_cast<std::size_t>(ds.size()));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(ds.size()));
  std::iota(idx.begin(), idx.end(), 0);
  const int batch = 256;
  for (std::size_t at = 0; at < idx.size(); at += batch) {
    const int B = static_cast<int>(std::min<std::size_t>(batch, idx.size() - at));
    auto x = make_input_batch<float>(ds, idx, at, B);
    auto pred = net.forward(x, nn::Mode::Eval);
    for (int b = 0; b < B; ++b) {
      const auto col = idx[at + static_cast<std::size_t>(b)];
      Mat pred_map(s, s), label_map(s, s);
      for (int r = 0; r < s; ++r) {
        for (int c = 0; c < s; ++c) {
          pred_map(r, c) = static_cast<double>(
              pred.data(static_cast<Eigen::Index>(b) * K + static_cast<Eigen::Index>(r) * s + c));
          label_map(r, c) = static_cast<double>(ds.labels(static_cast<Eigen::Index>(r) * s + c, col));
        }
      }
      accs.push_back(get_accuracy(label_map, pred_map, peaks));
    }
  }
  return accs;
}

std::string condition_label(SweepKind kind, double value) {
  char buf[64];
  switch (kind) {
    case SweepKind::BySourceCount:
      std::snprintf(buf, sizeof(buf), "N=%d", static_cast<int>(std::llround(value)));
      break;
    case SweepKind::ByFrequency:
      std::snprintf(buf, sizeof(buf), "f=%gHz", value);
      break;
    case SweepKind::ByDistance:
      std::snprintf(buf, sizeof(buf), "Z=%gm", value);
      break;
  }
  return buf;
}

}  // namespace

EvalReport sweep(Network<float>& net, const SweepProtocol& protocol,
                 const PeakExtractionConfig& peaks) {
  if (protocol.base.array.mics_per_axis != net.cfg.t ||
      protocol.base.grid.cells_per_axis != net.cfg.s) {
    throw config_mismatch_error("sweep: scenario geometry does not match checkpoint");
  }
  EvalReport report;
  report.protocol = sweep_kind_name(protocol.kind);
  report.layout = layout_name(protocol.base.layout);
  report.noisy = protocol.noise.enabled;
  report.snr_db = protocol.noise.snr_db;
  report.samples_per_condition = protocol.samples_per_condition;
  report.seed = protocol.seed;

  const std::vector<double> values =
      protocol.values.empty() ? default_sweep_values(protocol.kind) : protocol.values;
  std::vector<double> all;
  for (std::size_t ci = 0; ci < values.size(); ++ci) {
    const ScenarioRanges ranges = ranges_for_condition(protocol, values[ci]);
    const Dataset ds = generate_samples(protocol.samples_per_condition, ranges, protocol.noise,
                                        derive_seed(protocol.seed, SeedStream::Eval, ci));
    SweepCondition cond;
    cond.name = condition_label(protocol.kind, values[ci]);
    cond.value = values[ci];
    cond.accuracies = condition_accuracies(net, ds, peaks);
    cond.mean_accuracy =
        cond.accuracies.empty()
            ? 0.0
            : std::accumulate(cond.accuracies.begin(), cond.accuracies.end(), 0.0) /
                  static_cast<double>(cond.accuracies.size());
    all.insert(all.end(), cond.accuracies.begin(), cond.accuracies.end());
    report.conditions.push_back(std::move(cond));
  }
  report.overall_mean =
      all.empty() ? 0.0 : std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  report.histogram = accuracy_histogram(all);
  return report;
}

PairedSweepReport paired_sweep(Network<float>& first, Network<float>& second,
                               const SweepProtocol& protocol, const PeakExtractionConfig& peaks) {
  PairedSweepReport out;
  out.first = sweep(first, protocol, peaks);
  out.second = sweep(second, protocol, peaks);
  std::vector<double> diffs;
  for (std::size_t c = 0; c < out.first.conditions.size(); ++c) {
    const auto& a = out.first.conditions[c].accuracies;
    const auto& b = out.second.conditions[c].accuracies;
    if (a.size() != b.size()) throw validation_error("paired sweep: condition size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) diffs.push_back(a[i] - b[i]);
  }
  out.paired_samples = static_cast<std::int64_t>(diffs.size());
  if (!diffs.empty()) {
    const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) /
                        static_cast<double>(diffs.size());
    double var = 0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diffs.size());
    out.mean_diff = mean;
    out.ci95_half_width = 1.96 * std::sqrt(var / static_cast<double>(diffs.size()));
  }
  return out;
}

namespace {

json report_to_json(const EvalReport& r) {
  json conditions = json::array();
  for (const auto& c : r.conditions) {
    conditions.push_back(json{{"name", c.name},
                              {"value", c.value},
                              {"samples", c.accuracies.size()},
                              {"mean_accuracy", c.mean_accuracy},
                              {"accuracies", c.accuracies}});
  }
  json fine = json::array();
  for (const auto& [value, count] : r.histogram.value_counts) {
    fine.push_back(json{{"accuracy", value}, {"count", count}});
  }
  return json{{"kind", "sslkit-eval-report"},
              {"format_version", kFormatVersion},
              {"protocol", r.protocol},
              {"layout", r.layout},
              {"noisy", r.noisy},
              {"snr_db", r.snr_db},
              {"samples_per_condition", r.samples_per_condition},
              {"seed", r.seed},
              {"overall_mean", r.overall_mean},
              {"conditions", conditions},
              {"histogram",
               {{"values", fine},
                {"buckets_percent", {0, 25, 50, 75, 100}},
                {"bucket_counts", r.histogram.buckets},
                {"total", r.histogram.total}}}};
}

}  // namespace

std::string report_to_json_text(const EvalReport& report) {
  return report_to_json(report).dump(2);
}

void write_report_json(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << report_to_json_text(report) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

void write_report_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "condition,value,samples,mean_accuracy\n";
  char buf[160];
  for (const auto& c : report.conditions) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%zu,%.17g\n", c.name.c_str(), c.value,
                  c.accuracies.size(), c.mean_accuracy);
    out << buf;
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace ssl

#pragma once

#include "sslkit/common.hpp"
#include "sslkit/datagen.hpp"
#include "sslkit/metrics.hpp"
#include "sslkit/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace ssl {

enum class SweepKind { BySourceCount, ByFrequency, ByDistance };

std::string sweep_kind_name(SweepKind kind);
SweepKind sweep_kind_from_name(const std::string& name);

// One swept condition holds its value fixed while the remaining scenario
// dimensions stay randomized over the base ranges.
struct SweepProtocol {
  SweepKind kind = SweepKind::BySourceCount;
  ScenarioRanges base;
  std::vector<double> values;  // empty -> default_sweep_values(kind)
  int samples_per_condition = 1000;
  NoiseConfig noise{30.0, 0, false, false};
  std::uint64_t seed = 0;
};

std::vector<double> default_sweep_values(SweepKind kind);

struct AccuracyHistogram {
  // Exact attainable accuracy values (|tc n pc| / |tc|) with their counts...
  std::vector<std::pair<double, int>> value_counts;
  // ...and the coarse rollup into the 0/25/50/75/100% buckets.
  std::array<int, 5> buckets{};
  int total = 0;
};

AccuracyHistogram accuracy_histogram(const std::vector<double>& accuracies);

struct SweepCondition {
  std::string name;
  double value = 0;
  std::vector<double> accuracies;
  double mean_accuracy = 0;
};

struct EvalReport {
  std::string protocol;
  std::string layout;
  bool noisy = false;
  double snr_db = 30.0;
  int samples_per_condition = 0;
  std::uint64_t seed = 0;
  std::vector<SweepCondition> conditions;
  double overall_mean = 0;
  AccuracyHistogram histogram;
};

// Generates a fresh seeded dataset per condition and evaluates the network
// with Algorithm-2 accuracy.
EvalReport sweep(Network<float>& net, const SweepProtocol& protocol,
                 const PeakExtractionConfig& peaks = {});

// Shared-dataset paired comparison of two models (loss ablation): both see
// the identical per-condition datasets; the confidence interval is a normal
// approximation over per-sample paired accuracy differences.
struct PairedSweepReport {
  EvalReport first;
  EvalReport second;
  double mean_diff = 0;  // first - second
  double ci95_half_width = 0;
  std::int64_t paired_samples = 0;
};

PairedSweepReport paired_sweep(Network<float>& first, Network<float>& second,
                               const SweepProtocol& protocol,
                               const PeakExtractionConfig& peaks = {});

void write_report_json(const std::string& path, const EvalReport& report);
void write_report_csv(const std::string& path, const EvalReport& report);
std::string report_to_json_text(const EvalReport& report);

}  // namespace ssl

#include "sslkit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ssl {

std::vector<std::pair<int, int>> get_source_coordinates(const Mat& heatmap,
                                                        const PeakExtractionConfig& cfg) {
  if (!(cfg.tolerance > 0 && cfg.tolerance < 1)) {
    throw validation_error("peak extraction tolerance must lie in (0, 1)");
  }
  std::vector<std::pair<int, int>> coords;
  const double m = heatmap.maxCoeff();
  if (m <= 0) return coords;
  for (Eigen::Index i = 0; i < heatmap.rows(); ++i) {
    for (Eigen::Index j = 0; j < heatmap.cols(); ++j) {
      if (std::abs(heatmap(i, j) - m) < cfg.tolerance * m) {
        coords.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return coords;
}

double get_accuracy(const Mat& true_label, const Mat& predicted, const PeakExtractionConfig& cfg) {
  const auto tc = get_source_coordinates(true_label, cfg);
  const auto pc = get_source_coordinates(predicted, cfg);
  if (tc.empty()) return 0.0;
  std::vector<std::pair<int, int>> inter;
  std::set_intersection(tc.begin(), tc.end(), pc.begin(), pc.end(), std::back_inserter(inter));
  return static_cast<double>(inter.size()) / static_cast<double>(tc.size());
}

}  // namespace ssl

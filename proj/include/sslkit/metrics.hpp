#pragma once

#include "sslkit/common.hpp"

#include <utility>
#include <vector>

namespace ssl {

struct PeakExtractionConfig {
  double tolerance = 0.2;
};

// Cells whose value lies within tolerance*max of the map maximum m:
// |y_i - m| < t*m (strict). A map with m <= 0 yields no detections.
std::vector<std::pair<int, int>> get_source_coordinates(const Mat& heatmap,
                                                        const PeakExtractionConfig& cfg = {});

// |tc intersect pc| / |tc| with both coordinate sets extracted by
// get_source_coordinates; 0 when tc is empty.
double get_accuracy(const Mat& true_label, const Mat& predicted,
                    const PeakExtractionConfig& cfg = {});

}  // namespace ssl

#pragma once

#include "sslkit/common.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ssl {

// Matrix CSV, row-major, 17 significant digits so doubles round-trip exactly.
void write_csv(const std::string& path, const Mat& m);
Mat read_csv(const std::string& path);

// 8-bit binary PGM (P5); values are clamped to [0,1] and scaled to 0..255.
void write_pgm(const std::string& path, const Mat& values);

// Self-contained SVG heat map: one filled square per grid cell, optional
// star markers at true source cells.
void write_svg_heatmap(const std::string& path, const Mat& values,
                       const std::vector<std::pair<int, int>>& truth_cells = {});

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const void* data, std::size_t size);

std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed = 0);

}  // namespace ssl

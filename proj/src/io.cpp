#include "sslkit/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssl {

void write_csv(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

Mat read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw io_error("ragged CSV: " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("empty CSV: " + path);
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_pgm(const std::string& path, const Mat& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "P5\n" << values.cols() << " " << values.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      double v = std::clamp(values(i, j), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
  if (!out) throw io_error("write failed: " + path);
}

namespace {

// Compact five-stop colormap (dark blue -> yellow), good enough for heat maps.
std::array<int, 3> colormap(double v) {
  static const double stops[5][3] = {
      {13, 8, 135}, {126, 3, 168}, {204, 71, 120}, {248, 149, 64}, {240, 249, 33}};
  v = std::clamp(v, 0.0, 1.0) * 4.0;
  int k = std::min(3, static_cast<int>(v));
  double f = v - k;
  std::array<int, 3> rgb;
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<int>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  return rgb;
}

}  // namespace

void write_svg_heatmap(const std::string& path, const Mat& values,
                       const std::vector<std::pair<int, int>>& truth_cells) {
  const int cell = 20;
  const Eigen::Index rows = values.rows(), cols = values.cols();
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell << "\" height=\""
      << rows * cell << "\" viewBox=\"0 0 " << cols * cell << " " << rows * cell << "\">\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      auto rgb = colormap(std::clamp(values(i, j), 0.0, 1.0));
      out << "<rect x=\"" << j * cell << "\" y=\"" << i * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << rgb[0] << ',' << rgb[1] << ',' << rgb[2]
          << ")\"/>\n";
    }
  }
  for (const auto& [r, c] : truth_cells) {
    double cx = (c + 0.5) * cell, cy = (r + 0.5) * cell;
    double ro = 0.42 * cell, ri = 0.17 * cell;
    out << "<polygon points=\"";
    for (int k = 0; k < 10; ++k) {
      double ang = -M_PI / 2 + k * M_PI / 5;
      double rad = (k % 2 == 0) ? ro : ri;
      out << cx + rad * std::cos(ang) << ',' << cy + rad * std::sin(ang);
      if (k < 9) out << ' ';
    }
    out << "\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw io_error("write failed: " + path);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw io_error("cannot open: " + path);
  auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw io_error("read failed: " + path);
  }
  return bytes;
}

void write_file_bytes(const std::string& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw io_error("write failed: " + path);
}

std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (std::size_t i = 0; i < size; ++i) c = table[(c ^ p[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

}  // namespace ssl

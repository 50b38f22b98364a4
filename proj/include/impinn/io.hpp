#pragma once

// Plain-text and image exporters: CSV (9 significant digits), legacy ASCII
// VTK polydata and binary PPM heatmaps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/sfem.hpp"

namespace impinn::io {

inline std::string format_number(double x, int digits = 9) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<std::string_view> header)
      : path_(path), out_(path) {
    if (!out_) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    bool first = true;
    for (auto h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) { row(std::span(values.begin(), values.size())); }

  void row(std::span<const double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_number(v);
      first = false;
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorKind::Io, "failed writing " + path_);
  }

  ~CsvWriter() {
    if (out_.is_open()) out_.close();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

using NamedField = std::pair<std::string, std::span<const double>>;

// Legacy ASCII VTK, POLYDATA with triangle cells and point-data scalars.
inline void write_vtk(const std::string& path, const sfem::TriMesh& mesh,
                      std::span<const NamedField> fields,
                      const std::string& title = "impinn") {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  f << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
  f << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.positions) {
    f << format_number(p[0], 17) << ' ' << format_number(p[1], 17) << ' '
      << format_number(p[2], 17) << '\n';
  }
  f << "POLYGONS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!fields.empty()) f << "POINT_DATA " << mesh.num_vertices() << '\n';
  for (const auto& [name, values] : fields) {
    if (values.size() != mesh.num_vertices()) {
      throw Error(ErrorKind::Validation, "VTK field '" + name + "' has wrong length");
    }
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) f << format_number(v, 17) << '\n';
  }
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path);
}

// Viridis-like ramp through five anchor colours.
inline std::array<unsigned char, 3> viridis(double s) {
  static constexpr double anchors[5][3] = {{68, 1, 84},
                                           {59, 82, 139},
                                           {33, 145, 140},
                                           {94, 201, 98},
                                           {253, 231, 37}};
  s = std::clamp(std::isfinite(s) ? s : 0.0, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(s));
  const double f = s - i;
  std::array<unsigned char, 3> c{};
  for (int k = 0; k < 3; ++k) {
    c[k] = static_cast<unsigned char>(
        std::lround(anchors[i][k] + f * (anchors[i + 1][k] - anchors[i][k])));
  }
  return c;
}

// Binary PPM, one pixel per sample, row-major with row 0 at the top.
// Values are normalised by their own min/max.
inline void write_ppm(const std::string& path, int width, int height,
                      std::span<const double> values) {
  if (width < 1 || height < 1 ||
      values.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::Validation, "PPM size does not match data");
  }
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = (hi > lo) ? hi - lo : 1.0;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  f << "P6\n" << width << ' ' << height << "\n255\n";
  for (double v : values) {
    const auto c = viridis(std::isfinite(lo) ? (v - lo) / span : 0.0);
    f.write(reinterpret_cast<const char*>(c.data()), 3);
  }
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace impinn::io

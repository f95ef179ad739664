#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fot/grid.hpp"

namespace fot {

// Text formats.
//
// Field file:   FIELD <kind> <n> <counts...> <lo...> <hi...>
//               then one line per node (row-major, axis 0 fastest) with
//               1 (scalar), 2 (vec2) or n^2 (matrix, row-major) values.
// Trace file:   TRACE <n> <counts...> <lo...> <hi...>
//               <node_count>
//               then one line per boundary node: <node_index> <re> <im>.
//
// All values are written with 17 significant digits so that a write/read
// round trip is bit-exact.

namespace detail {

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_grid_header(std::ostream& os, const Grid& g) {
  os << g.dim;
  for (int k = 0; k < g.dim; ++k) os << ' ' << g.counts[k];
  for (int k = 0; k < g.dim; ++k) os << ' ' << fmt_double(g.lo[k]);
  for (int k = 0; k < g.dim; ++k) os << ' ' << fmt_double(g.hi[k]);
}

inline Grid read_grid_header(std::istream& is, const std::string& path) {
  int dim = 0;
  is >> dim;
  require(is.good() && (dim == 2 || dim == 3), "field file: bad dimension in " + path);
  std::array<int, 3> counts{};
  std::array<double, 3> lo{}, hi{};
  for (int k = 0; k < dim; ++k) is >> counts[k];
  for (int k = 0; k < dim; ++k) is >> lo[k];
  for (int k = 0; k < dim; ++k) is >> hi[k];
  require(is.good(), "field file: truncated header in " + path);
  return build_grid(dim, lo, hi, counts);
}

}  // namespace detail

inline void write_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  os << "FIELD scalar ";
  detail::write_grid_header(os, f.grid);
  os << '\n';
  for (double x : f.v) os << detail::fmt_double(x) << '\n';
}

inline void write_field(const std::string& path, const Vec2Field& f) {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  os << "FIELD vec2 ";
  detail::write_grid_header(os, f.grid);
  os << '\n';
  for (const Vec2& w : f.v) os << detail::fmt_double(w.re) << ' ' << detail::fmt_double(w.im) << '\n';
}

inline void write_field(const std::string& path, const MatrixField& f) {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  os << "FIELD matrix ";
  detail::write_grid_header(os, f.grid);
  os << '\n';
  const int n = f.grid.dim;
  for (const SmallMat& m : f.v) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) os << (i + j ? " " : "") << detail::fmt_double(m(i, j));
    os << '\n';
  }
}

inline std::string read_field_kind(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open: " + path);
  std::string magic, kind;
  is >> magic >> kind;
  require(magic == "FIELD", "not a field file: " + path);
  return kind;
}

inline ScalarField read_scalar_field(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open: " + path);
  std::string magic, kind;
  is >> magic >> kind;
  require(magic == "FIELD" && kind == "scalar", "expected scalar field file: " + path);
  ScalarField f(detail::read_grid_header(is, path));
  for (double& x : f.v) is >> x;
  require(!is.fail(), "field file: truncated data in " + path);
  return f;
}

inline Vec2Field read_vec2_field(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open: " + path);
  std::string magic, kind;
  is >> magic >> kind;
  require(magic == "FIELD" && kind == "vec2", "expected vec2 field file: " + path);
  Vec2Field f(detail::read_grid_header(is, path));
  for (Vec2& w : f.v) is >> w.re >> w.im;
  require(!is.fail(), "field file: truncated data in " + path);
  return f;
}

inline MatrixField read_matrix_field(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open: " + path);
  std::string magic, kind;
  is >> magic >> kind;
  require(magic == "FIELD" && kind == "matrix", "expected matrix field file: " + path);
  MatrixField f(detail::read_grid_header(is, path));
  const int n = f.grid.dim;
  for (SmallMat& m : f.v)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) is >> m(i, j);
  require(!is.fail(), "field file: truncated data in " + path);
  return f;
}

/// Boundary trace: values attached to a sorted subset of boundary nodes.
struct BoundaryTrace {
  Grid grid;
  std::vector<int> nodes;
  std::vector<Vec2> values;
};

inline void write_trace(const std::string& path, const BoundaryTrace& t) {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  os << "TRACE ";
  detail::write_grid_header(os, t.grid);
  os << '\n' << t.nodes.size() << '\n';
  for (std::size_t j = 0; j < t.nodes.size(); ++j)
    os << t.nodes[j] << ' ' << detail::fmt_double(t.values[j].re) << ' '
       << detail::fmt_double(t.values[j].im) << '\n';
}

inline BoundaryTrace read_trace(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open: " + path);
  std::string magic;
  is >> magic;
  require(magic == "TRACE", "not a trace file: " + path);
  BoundaryTrace t;
  t.grid = detail::read_grid_header(is, path);
  std::size_t count = 0;
  is >> count;
  t.nodes.resize(count);
  t.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) is >> t.nodes[j] >> t.values[j].re >> t.values[j].im;
  require(!is.fail(), "trace file: truncated data in " + path);
  return t;
}

/// Legacy-VTK structured-points export for visualization.
inline void write_vtk(const std::string& path, const ScalarField& f, const std::string& name = "field") {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  const Grid& g = f.grid;
  os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << g.counts[0] << ' ' << g.counts[1] << ' ' << (g.dim == 3 ? g.counts[2] : 1) << '\n';
  os << "ORIGIN " << g.lo[0] << ' ' << g.lo[1] << ' ' << (g.dim == 3 ? g.lo[2] : 0.0) << '\n';
  os << "SPACING " << g.h[0] << ' ' << g.h[1] << ' ' << (g.dim == 3 ? g.h[2] : 1.0) << '\n';
  os << "POINT_DATA " << g.node_count() << '\n';
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double x : f.v) os << detail::fmt_double(x) << '\n';
}

}  // namespace fot

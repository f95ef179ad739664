#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fot/core.hpp"

namespace fot {

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Uniform node-centered grid on an axis-aligned box, dimension 2 or 3.
/// Node index <-> flat index is row-major with axis 0 fastest.
struct Grid {
  int dim = 2;
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::array<int, 3> counts{};
  std::array<double, 3> h{};

  int node_count() const {
    int n = 1;
    for (int k = 0; k < dim; ++k) n *= counts[k];
    return n;
  }

  int cell_count() const {
    int n = 1;
    for (int k = 0; k < dim; ++k) n *= counts[k] - 1;
    return n;
  }

  int flat(const std::array<int, 3>& idx) const {
    int f = idx[dim - 1];
    for (int k = dim - 2; k >= 0; --k) f = f * counts[k] + idx[k];
    return f;
  }

  std::array<int, 3> unflat(int f) const {
    std::array<int, 3> idx{};
    for (int k = 0; k < dim; ++k) {
      idx[k] = f % counts[k];
      f /= counts[k];
    }
    return idx;
  }

  std::array<double, 3> coord(int node) const {
    const auto idx = unflat(node);
    std::array<double, 3> x{};
    for (int k = 0; k < dim; ++k) x[k] = lo[k] + idx[k] * h[k];
    return x;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= h[k];
    return v;
  }

  double box_volume() const {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= hi[k] - lo[k];
    return v;
  }

  double box_surface_area() const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      double face = 1.0;
      for (int l = 0; l < dim; ++l)
        if (l != k) face *= hi[l] - lo[l];
      s += 2.0 * face;
    }
    return s;
  }

  bool on_boundary(int node) const {
    const auto idx = unflat(node);
    for (int k = 0; k < dim; ++k)
      if (idx[k] == 0 || idx[k] == counts[k] - 1) return true;
    return false;
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && lo == o.lo && hi == o.hi && counts == o.counts;
  }
};

inline Grid build_grid(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                       const std::array<int, 3>& counts) {
  require(dim == 2 || dim == 3, "grid: dim must be 2 or 3");
  Grid g;
  g.dim = dim;
  g.lo = lo;
  g.hi = hi;
  g.counts = counts;
  for (int k = 0; k < dim; ++k) {
    require(counts[k] >= 3, "grid: counts too small (need >= 3 nodes per axis)");
    require(hi[k] > lo[k], "grid: degenerate box (need lo < hi componentwise)");
    g.h[k] = (hi[k] - lo[k]) / (counts[k] - 1);
  }
  for (int k = dim; k < 3; ++k) {
    // canonical values for the unused axis so grids compare by value
    g.lo[k] = 0.0;
    g.hi[k] = 0.0;
    g.h[k] = 0.0;
    g.counts[k] = 1;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Nodal fields
// ---------------------------------------------------------------------------

struct ScalarField {
  Grid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.node_count(), fill) {}

  static ScalarField sample(const Grid& g, const std::function<double(const std::array<double, 3>&)>& f) {
    ScalarField out(g);
    for (int j = 0; j < g.node_count(); ++j) out.v[j] = f(g.coord(j));
    return out;
  }

  double min_value() const { return *std::min_element(v.begin(), v.end()); }
  double max_value() const { return *std::max_element(v.begin(), v.end()); }
};

struct Vec2Field {
  Grid grid;
  std::vector<Vec2> v;

  Vec2Field() = default;
  explicit Vec2Field(const Grid& g, Vec2 fill = {}) : grid(g), v(g.node_count(), fill) {}

  static Vec2Field sample(const Grid& g, const std::function<Vec2(const std::array<double, 3>&)>& f) {
    Vec2Field out(g);
    for (int j = 0; j < g.node_count(); ++j) out.v[j] = f(g.coord(j));
    return out;
  }

  double max_norm() const {
    double m = 0.0;
    for (const auto& w : v) m = std::max(m, norm(w));
    return m;
  }
};

/// n x n matrix per node.
struct MatrixField {
  Grid grid;
  std::vector<SmallMat> v;

  MatrixField() = default;
  explicit MatrixField(const Grid& g) : grid(g), v(g.node_count(), SmallMat(g.dim)) {}
};

template <class Field>
void check_same_grid(const Field& a, const Grid& g, const char* what) {
  require(a.grid == g, std::string("field/grid mismatch: ") + what);
}

// ---------------------------------------------------------------------------
// Boundary faces and subsets
// ---------------------------------------------------------------------------

/// One boundary element face: 2^(dim-1) node ids on a box side, with the
/// outward normal along +/- axis.
struct Face {
  std::array<int, 4> nodes{-1, -1, -1, -1};
  int axis = 0;
  bool max_side = false;
  double area = 0.0;

  int corner_count(int dim) const { return dim == 2 ? 2 : 4; }
};

struct BoundarySet {
  Grid grid;
  std::vector<Face> faces;
  std::vector<int> nodes;      // sorted unique nodes of all faces
  std::vector<double> node_w;  // per-node surface quadrature weight, aligned with `nodes`
  double area = 0.0;           // sum of face areas

  int node_pos(int node) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
    if (it == nodes.end() || *it != node) return -1;
    return static_cast<int>(it - nodes.begin());
  }

  void finalize() {
    nodes.clear();
    area = 0.0;
    for (const auto& f : faces) {
      area += f.area;
      for (int c = 0; c < f.corner_count(grid.dim); ++c) nodes.push_back(f.nodes[c]);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    node_w.assign(nodes.size(), 0.0);
    for (const auto& f : faces) {
      const int nc = f.corner_count(grid.dim);
      const double w = f.area / nc;
      for (int c = 0; c < nc; ++c) node_w[node_pos(f.nodes[c])] += w;
    }
  }
};

namespace detail {

struct SideSelector {
  bool all = false;
  int axis = 0;
  bool max_side = false;
  // inclusive node-index windows over the tangential axes, in increasing axis
  // order; empty means the full side
  std::vector<std::array<int, 2>> windows;
};

inline SideSelector parse_selector(const Grid& g, const std::string& sel) {
  SideSelector s;
  if (sel == "all") {
    s.all = true;
    return s;
  }
  // form: x<k>_min or x<k>_max, optionally followed by [a:b] or [a:b,c:d]
  const std::size_t bracket = sel.find('[');
  const std::string side = sel.substr(0, bracket);
  require(side.size() == 6 && side[0] == 'x' && side[1] >= '0' && side[1] <= '9',
          "boundary selector: unknown selector '" + sel + "'");
  s.axis = side[1] - '0';
  require(s.axis < g.dim, "boundary selector: unknown selector '" + sel + "' (axis out of range)");
  const std::string suffix = side.substr(2);
  if (suffix == "_min")
    s.max_side = false;
  else if (suffix == "_max")
    s.max_side = true;
  else
    fail("boundary selector: unknown selector '" + sel + "'");
  if (bracket != std::string::npos) {
    require(sel.back() == ']', "boundary selector: malformed window in '" + sel + "'");
    std::string body = sel.substr(bracket + 1, sel.size() - bracket - 2);
    std::size_t start = 0;
    while (start < body.size()) {
      const std::size_t comma = body.find(',', start);
      const std::string range = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const std::size_t colon = range.find(':');
      require(colon != std::string::npos, "boundary selector: window ranges use a:b in '" + sel + "'");
      s.windows.push_back({std::stoi(range.substr(0, colon)), std::stoi(range.substr(colon + 1))});
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return s;
}

inline void append_side_faces(BoundarySet& out, const Grid& g, int axis, bool max_side,
                              const std::vector<std::array<int, 2>>& windows) {
  std::vector<int> tangential;
  for (int k = 0; k < g.dim; ++k)
    if (k != axis) tangential.push_back(k);
  double face_area = 1.0;
  for (int t : tangential) face_area *= g.h[t];

  const int fixed = max_side ? g.counts[axis] - 1 : 0;
  const int t0 = tangential[0];
  const int t0_cells = g.counts[t0] - 1;
  const int t1 = g.dim == 3 ? tangential[1] : -1;
  const int t1_cells = g.dim == 3 ? g.counts[t1] - 1 : 1;

  auto in_window = [&](int tpos, int lo_idx) {
    if (windows.empty()) return true;
    require(static_cast<int>(windows.size()) == g.dim - 1,
            "boundary selector: window count must match tangential axes");
    const auto& w = windows[tpos];
    return lo_idx >= w[0] && lo_idx + 1 <= w[1];
  };

  for (int j1 = 0; j1 < t1_cells; ++j1) {
    if (g.dim == 3 && !in_window(1, j1)) continue;
    for (int j0 = 0; j0 < t0_cells; ++j0) {
      if (!in_window(0, j0)) continue;
      Face f;
      f.axis = axis;
      f.max_side = max_side;
      f.area = face_area;
      int c = 0;
      for (int b1 = 0; b1 < (g.dim == 3 ? 2 : 1); ++b1) {
        for (int b0 = 0; b0 < 2; ++b0) {
          std::array<int, 3> idx{};
          idx[axis] = fixed;
          idx[t0] = j0 + b0;
          if (g.dim == 3) idx[t1] = j1 + b1;
          f.nodes[c++] = g.flat(idx);
        }
      }
      out.faces.push_back(f);
    }
  }
}

}  // namespace detail

/// Selects boundary faces: "all", or one side "x<k>_min"/"x<k>_max" with an
/// optional inclusive node-index window "[a:b]" ("[a:b,c:d]" in 3D) over the
/// tangential axes.
inline BoundarySet boundary_subset(const Grid& g, const std::string& selector) {
  BoundarySet out;
  out.grid = g;
  const auto s = detail::parse_selector(g, selector);
  if (s.all) {
    for (int axis = 0; axis < g.dim; ++axis) {
      detail::append_side_faces(out, g, axis, false, {});
      detail::append_side_faces(out, g, axis, true, {});
    }
  } else {
    detail::append_side_faces(out, g, s.axis, s.max_side, s.windows);
  }
  require(!out.faces.empty(), "boundary selector: empty selection '" + selector + "'");
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Cell and face quadrature (tensor-product 2-point Gauss on the multi-linear
// interpolant, exact per cell for per-axis degree <= 3 integrands)
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)
}

/// Reference tables for one cell of a uniform grid (identical for all cells):
/// shape values and physical shape gradients at the 2^dim Gauss points.
struct CellQuad {
  int dim = 2;
  int corners = 4;                     // 2^dim
  double point_weight = 0.0;           // cell volume / 2^dim
  std::array<int, 8> corner_offset{};  // flat-index offset of each corner
  std::array<std::array<double, 8>, 8> N{};                  // N[gauss][corner]
  std::array<std::array<std::array<double, 3>, 8>, 8> dN{};  // dN[gauss][corner][axis]

  explicit CellQuad(const Grid& g) {
    dim = g.dim;
    corners = 1 << dim;
    point_weight = g.cell_volume() / corners;
    for (int a = 0; a < corners; ++a) {
      std::array<int, 3> idx{};
      for (int k = 0; k < dim; ++k) idx[k] = (a >> k) & 1;
      corner_offset[a] = g.flat(idx);
    }
    for (int gp = 0; gp < corners; ++gp) {
      std::array<double, 3> zeta{};
      for (int k = 0; k < dim; ++k) zeta[k] = ((gp >> k) & 1) ? detail::kGauss : -detail::kGauss;
      for (int a = 0; a < corners; ++a) {
        double val = 1.0;
        for (int k = 0; k < dim; ++k) {
          const double s = ((a >> k) & 1) ? 1.0 : -1.0;
          val *= 0.5 * (1.0 + s * zeta[k]);
        }
        N[gp][a] = val;
        for (int k = 0; k < dim; ++k) {
          const double sk = ((a >> k) & 1) ? 1.0 : -1.0;
          double dval = sk / g.h[k];
          for (int l = 0; l < dim; ++l) {
            if (l == k) continue;
            const double sl = ((a >> l) & 1) ? 1.0 : -1.0;
            dval *= 0.5 * (1.0 + sl * zeta[l]);
          }
          dN[gp][a][k] = dval;
        }
      }
    }
  }
};

/// Calls fn(corner_flat_ids) for every cell.
template <class Fn>
void for_each_cell(const Grid& g, const CellQuad& q, Fn&& fn) {
  const int c0 = g.counts[0] - 1;
  const int c1 = g.counts[1] - 1;
  const int c2 = g.dim == 3 ? g.counts[2] - 1 : 1;
  std::array<int, 8> ids{};
  for (int k2 = 0; k2 < c2; ++k2) {
    for (int k1 = 0; k1 < c1; ++k1) {
      for (int k0 = 0; k0 < c0; ++k0) {
        const int base = g.flat({k0, k1, k2});
        for (int a = 0; a < q.corners; ++a) ids[a] = base + q.corner_offset[a];
        fn(ids);
      }
    }
  }
}

/// Face quadrature tables: 2^(dim-1) Gauss points over the tangential axes.
struct FaceQuad {
  int corners = 2;
  double point_weight = 0.0;
  std::array<std::array<double, 4>, 4> N{};

  FaceQuad(const Grid& g, int axis) {
    const int tdim = g.dim - 1;
    corners = 1 << tdim;
    double area = 1.0;
    for (int k = 0; k < g.dim; ++k)
      if (k != axis) area *= g.h[k];
    point_weight = area / corners;
    for (int gp = 0; gp < corners; ++gp) {
      for (int a = 0; a < corners; ++a) {
        double val = 1.0;
        for (int k = 0; k < tdim; ++k) {
          const double z = ((gp >> k) & 1) ? detail::kGauss : -detail::kGauss;
          const double s = ((a >> k) & 1) ? 1.0 : -1.0;
          val *= 0.5 * (1.0 + s * z);
        }
        N[gp][a] = val;
      }
    }
  }
};

/// Integral over the box of the multi-linear interpolant of f.
inline double integrate_volume(const ScalarField& f) {
  const Grid& g = f.grid;
  const CellQuad q(g);
  double total = 0.0;
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int gp = 0; gp < q.corners; ++gp) {
      double val = 0.0;
      for (int a = 0; a < q.corners; ++a) val += q.N[gp][a] * f.v[ids[a]];
      total += q.point_weight * val;
    }
  });
  return total;
}

/// Surface integral over the faces of `bs` of the face interpolant of f.
inline double integrate_surface(const ScalarField& f, const BoundarySet& bs) {
  require(!bs.faces.empty(), "integrate_surface: empty boundary set");
  check_same_grid(f, bs.grid, "integrate_surface");
  double total = 0.0;
  const int last_axis = bs.grid.dim == 3 ? 2 : 0;
  const std::array<FaceQuad, 3> fq{FaceQuad(bs.grid, 0), FaceQuad(bs.grid, 1),
                                   FaceQuad(bs.grid, last_axis)};
  for (const auto& face : bs.faces) {
    const FaceQuad& q = fq[face.axis];
    const int nc = face.corner_count(bs.grid.dim);
    for (int gp = 0; gp < nc; ++gp) {
      double val = 0.0;
      for (int a = 0; a < nc; ++a) val += q.N[gp][a] * f.v[face.nodes[a]];
      total += q.point_weight * val;
    }
  }
  return total;
}

/// Per-node volume quadrature weights q_j: integrating the interpolant of any
/// nodal field equals sum_j q_j f_j (up to floating-point reassociation).
inline std::vector<double> volume_node_weights(const Grid& g) {
  std::vector<double> w(g.node_count(), 0.0);
  const CellQuad q(g);
  const double share = g.cell_volume() / q.corners;
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int a = 0; a < q.corners; ++a) w[ids[a]] += share;
  });
  return w;
}

}  // namespace fot

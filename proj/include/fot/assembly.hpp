#pragma once

#include <vector>

#include "fot/coefficients.hpp"
#include "fot/grid.hpp"

namespace fot {

// ---------------------------------------------------------------------------
// Block-sparse operator
// ---------------------------------------------------------------------------

/// Non-symmetric sparse operator with one 2x2 block per stored node pair.
/// The sparsity pattern (node adjacency through shared cells) is symmetric;
/// the block values need not be.  A transpose view is available through
/// apply_transpose without rebuilding.
struct SparseBlockOperator {
  Grid grid;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<Mat2> blocks;
  std::vector<int> trans_idx;  // position of the mirrored (col,row) entry

  int rows() const { return grid.node_count(); }

  void build_pattern() {
    const Grid& g = grid;
    const int nn = g.node_count();
    row_ptr.assign(nn + 1, 0);
    col_idx.clear();
    // neighbors within Chebyshev distance 1, emitted in flat-index order
    const int d2 = g.dim == 3 ? 1 : 0;
    for (int j = 0; j < nn; ++j) {
      const auto idx = g.unflat(j);
      for (int o2 = -d2; o2 <= d2; ++o2) {
        for (int o1 = -1; o1 <= 1; ++o1) {
          for (int o0 = -1; o0 <= 1; ++o0) {
            std::array<int, 3> nb{idx[0] + o0, idx[1] + o1, idx[2] + o2};
            bool ok = true;
            for (int k = 0; k < g.dim; ++k) ok = ok && nb[k] >= 0 && nb[k] < g.counts[k];
            if (ok) col_idx.push_back(g.flat(nb));
          }
        }
      }
      row_ptr[j + 1] = static_cast<int>(col_idx.size());
    }
    blocks.assign(col_idx.size(), Mat2{});
    // mirrored-entry lookup for the transpose view
    trans_idx.assign(col_idx.size(), -1);
    for (int j = 0; j < nn; ++j) {
      for (int e = row_ptr[j]; e < row_ptr[j + 1]; ++e) {
        const int k = col_idx[e];
        int lo = row_ptr[k], hi = row_ptr[k + 1];
        while (lo < hi) {
          const int mid = (lo + hi) / 2;
          if (col_idx[mid] < j)
            lo = mid + 1;
          else
            hi = mid;
        }
        trans_idx[e] = lo;
      }
    }
  }

  int entry(int row, int col) const {
    for (int e = row_ptr[row]; e < row_ptr[row + 1]; ++e)
      if (col_idx[e] == col) return e;
    return -1;
  }

  void apply(const std::vector<Vec2>& x, std::vector<Vec2>& y) const {
    const int nn = rows();
    y.assign(nn, Vec2{});
    for (int j = 0; j < nn; ++j) {
      Vec2 acc{};
      for (int e = row_ptr[j]; e < row_ptr[j + 1]; ++e) acc += blocks[e].apply(x[col_idx[e]]);
      y[j] = acc;
    }
  }

  void apply_transpose(const std::vector<Vec2>& x, std::vector<Vec2>& y) const {
    const int nn = rows();
    y.assign(nn, Vec2{});
    for (int j = 0; j < nn; ++j) {
      Vec2 acc{};
      for (int e = row_ptr[j]; e < row_ptr[j + 1]; ++e)
        acc += blocks[trans_idx[e]].apply_transpose(x[col_idx[e]]);
      y[j] = acc;
    }
  }

  double quadratic_form(const std::vector<Vec2>& u, const std::vector<Vec2>& w) const {
    std::vector<Vec2> t;
    apply(u, t);
    double s = 0.0;
    for (int j = 0; j < rows(); ++j) s += dot(t[j], w[j]);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Assembly of the Robin bilinear form
// ---------------------------------------------------------------------------

namespace detail {

inline SmallMat interp_matrix(const MatrixField& B, const std::array<int, 8>& ids,
                              const std::array<double, 8>& shape, int corners, int dim) {
  SmallMat m(dim);
  for (int a = 0; a < corners; ++a) {
    const SmallMat& ba = B.v[ids[a]];
    const double w = shape[a];
    for (int i = 0; i < dim * dim; ++i) m.a[i] += w * ba.a[i];
  }
  return m;
}

inline Mat2 interp_mat2(const std::vector<Mat2>& L, const std::array<int, 8>& ids,
                        const std::array<double, 8>& shape, int corners) {
  Mat2 m{};
  for (int a = 0; a < corners; ++a) {
    const double w = shape[a];
    m.rr += w * L[ids[a]].rr;
    m.ri += w * L[ids[a]].ri;
    m.ir += w * L[ids[a]].ir;
    m.ii += w * L[ids[a]].ii;
  }
  return m;
}

inline Vec2 interp_vec2(const std::vector<Vec2>& u, const std::array<int, 8>& ids,
                        const std::array<double, 8>& shape, int corners) {
  Vec2 w{};
  for (int a = 0; a < corners; ++a) w += shape[a] * u[ids[a]];
  return w;
}

inline double interp_scalar(const std::vector<double>& u, const std::array<int, 8>& ids,
                            const std::array<double, 8>& shape, int corners) {
  double s = 0.0;
  for (int a = 0; a < corners; ++a) s += shape[a] * u[ids[a]];
  return s;
}

}  // namespace detail

/// Galerkin matrix of
///   (u, psi) -> int_O [ B : (Du^T Dpsi) + (L u) . psi ] + int_dO gamma u . psi
/// with nodally sampled coefficients interpolated inside cells.  The diffusion
/// couples the two components identically; L carries all cross-component
/// coupling.
inline SparseBlockOperator assemble_system(const Grid& g, const MatrixField& B,
                                           const std::vector<Mat2>& L, double gamma,
                                           const BoundarySet& robin) {
  check_same_grid(B, g, "assemble_system B");
  require(static_cast<int>(L.size()) == g.node_count(), "assemble_system: L size mismatch");
  require(robin.grid == g, "assemble_system: boundary set grid mismatch");
  require(std::abs(robin.area - g.box_surface_area()) <= 1e-9 * g.box_surface_area(),
          "assemble_system: incomplete boundary coverage for the Robin term");
  for (const auto& m : B.v) {
    require(m.max_asymmetry() <= 1e-12, "assemble_system: B must be symmetric");
    require(sym_eig_range(m)[0] > 0.0, "assemble_system: B must be positive definite");
  }

  SparseBlockOperator op;
  op.grid = g;
  op.build_pattern();

  const CellQuad q(g);
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    double local_s[8][8] = {};
    Mat2 local_r[8][8] = {};
    for (int gp = 0; gp < q.corners; ++gp) {
      const SmallMat bg = detail::interp_matrix(B, ids, q.N[gp], q.corners, g.dim);
      const Mat2 lg = detail::interp_mat2(L, ids, q.N[gp], q.corners);
      for (int a = 0; a < q.corners; ++a) {
        const auto bda = bg.apply(q.dN[gp][a]);
        for (int b = 0; b < q.corners; ++b) {
          double stiff = 0.0;
          for (int k = 0; k < g.dim; ++k) stiff += bda[k] * q.dN[gp][b][k];
          local_s[a][b] += q.point_weight * stiff;
          local_r[a][b] += (q.point_weight * q.N[gp][a] * q.N[gp][b]) * lg;
        }
      }
    }
    for (int a = 0; a < q.corners; ++a) {
      for (int b = 0; b < q.corners; ++b) {
        // weak form pairs trial a with test b; row = test index
        const int e = op.entry(ids[b], ids[a]);
        op.blocks[e].rr += local_s[a][b] + local_r[a][b].rr;
        op.blocks[e].ii += local_s[a][b] + local_r[a][b].ii;
        op.blocks[e].ri += local_r[a][b].ri;
        op.blocks[e].ir += local_r[a][b].ir;
      }
    }
  });

  const int last_axis = g.dim == 3 ? 2 : 0;
  const std::array<FaceQuad, 3> fq{FaceQuad(g, 0), FaceQuad(g, 1), FaceQuad(g, last_axis)};
  for (const auto& face : robin.faces) {
    const FaceQuad& fqa = fq[face.axis];
    const int nc = face.corner_count(g.dim);
    for (int gp = 0; gp < nc; ++gp) {
      for (int a = 0; a < nc; ++a) {
        for (int b = 0; b < nc; ++b) {
          const double mass = gamma * fqa.point_weight * fqa.N[gp][a] * fqa.N[gp][b];
          const int e = op.entry(face.nodes[b], face.nodes[a]);
          op.blocks[e].rr += mass;
          op.blocks[e].ii += mass;
        }
      }
    }
  }
  return op;
}

/// Load vector of
///   psi -> int_O [ f . psi + F : Dpsi ] + int_G g . psi
/// F is an optional per-node 2 x dim field (rows indexed re/im).
struct GradientField {
  Grid grid;
  // gradient rows per node: [node][component 0/1][axis]
  std::vector<std::array<std::array<double, 3>, 2>> v;

  GradientField() = default;
  explicit GradientField(const Grid& g) : grid(g), v(g.node_count()) {}
};

inline std::vector<Vec2> assemble_rhs(const Grid& g, const Vec2Field* f, const GradientField* F,
                                      const Vec2Field* bdata, const BoundarySet* where) {
  std::vector<Vec2> rhs(g.node_count(), Vec2{});
  const CellQuad q(g);
  if (f != nullptr || F != nullptr) {
    if (f) check_same_grid(*f, g, "assemble_rhs f");
    if (F) require(F->grid == g, "assemble_rhs: F grid mismatch");
    for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
      for (int gp = 0; gp < q.corners; ++gp) {
        Vec2 fg{};
        if (f) fg = detail::interp_vec2(f->v, ids, q.N[gp], q.corners);
        std::array<std::array<double, 3>, 2> Fg{};
        if (F) {
          for (int a = 0; a < q.corners; ++a)
            for (int c = 0; c < 2; ++c)
              for (int k = 0; k < g.dim; ++k) Fg[c][k] += q.N[gp][a] * F->v[ids[a]][c][k];
        }
        for (int a = 0; a < q.corners; ++a) {
          Vec2 add = (q.point_weight * q.N[gp][a]) * fg;
          if (F) {
            for (int k = 0; k < g.dim; ++k) {
              add.re += q.point_weight * Fg[0][k] * q.dN[gp][a][k];
              add.im += q.point_weight * Fg[1][k] * q.dN[gp][a][k];
            }
          }
          rhs[ids[a]] += add;
        }
      }
    });
  }
  if (bdata != nullptr) {
    require(where != nullptr, "assemble_rhs: boundary data without a boundary set");
    check_same_grid(*bdata, g, "assemble_rhs boundary data");
    const int last_axis = g.dim == 3 ? 2 : 0;
    const std::array<FaceQuad, 3> fqs{FaceQuad(g, 0), FaceQuad(g, 1), FaceQuad(g, last_axis)};
    for (const auto& face : where->faces) {
      const FaceQuad& fqa = fqs[face.axis];
      const int nc = face.corner_count(g.dim);
      for (int gp = 0; gp < nc; ++gp) {
        Vec2 gg{};
        for (int a = 0; a < nc; ++a) gg += fqa.N[gp][a] * bdata->v[face.nodes[a]];
        for (int a = 0; a < nc; ++a) rhs[face.nodes[a]] += (fqa.point_weight * fqa.N[gp][a]) * gg;
      }
    }
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Coefficient-linear forms shared by the emission source, the linearized
// systems and the misfit gradient.  All of them evaluate nodal coefficient
// fields at the Gauss points of the common quadrature, which is what makes
// the discrete adjoints exact transposes.
// ---------------------------------------------------------------------------

/// Load vector with entries int_O c (H u) . psi for a nodal scalar c
/// (the emission source uses c = xi, its linearization c = eta).
inline std::vector<Vec2> emission_load(const Grid& g, const std::vector<double>& c,
                                       const ComplexCoeff& H, const std::vector<Vec2>& u) {
  std::vector<Vec2> rhs(g.node_count(), Vec2{});
  const CellQuad q(g);
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int gp = 0; gp < q.corners; ++gp) {
      const double cg = detail::interp_scalar(c, ids, q.N[gp], q.corners);
      const double hre = detail::interp_scalar(H.re.v, ids, q.N[gp], q.corners);
      const double him = detail::interp_scalar(H.im.v, ids, q.N[gp], q.corners);
      const Vec2 ug = detail::interp_vec2(u, ids, q.N[gp], q.corners);
      const Vec2 val = (q.point_weight * cg) * rotation_form(hre, him).apply(ug);
      for (int a = 0; a < q.corners; ++a) rhs[ids[a]] += q.N[gp][a] * val;
    }
  });
  return rhs;
}

/// Transposed emission load: entries int_O c (H^T psi) . z for test z.
inline std::vector<Vec2> emission_load_transpose(const Grid& g, const std::vector<double>& c,
                                                 const ComplexCoeff& H, const std::vector<Vec2>& psi) {
  std::vector<Vec2> rhs(g.node_count(), Vec2{});
  const CellQuad q(g);
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int gp = 0; gp < q.corners; ++gp) {
      const double cg = detail::interp_scalar(c, ids, q.N[gp], q.corners);
      const double hre = detail::interp_scalar(H.re.v, ids, q.N[gp], q.corners);
      const double him = detail::interp_scalar(H.im.v, ids, q.N[gp], q.corners);
      const Vec2 pg = detail::interp_vec2(psi, ids, q.N[gp], q.corners);
      const Vec2 val = (q.point_weight * cg) * rotation_form(hre, him).apply_transpose(pg);
      for (int a = 0; a < q.corners; ++a) rhs[ids[a]] += q.N[gp][a] * val;
    }
  });
  return rhs;
}

/// Load vector with entries int_O c (Du : Dpsi) + int_O e u . psi, the
/// derivative of the Robin form with respect to its coefficients along the
/// nodal bumps (c in the scalar diffusion slot, e in the reaction slot).
inline std::vector<Vec2> coefficient_bump_load(const Grid& g, const std::vector<double>& c,
                                               const std::vector<double>& e,
                                               const std::vector<Vec2>& u) {
  std::vector<Vec2> rhs(g.node_count(), Vec2{});
  const CellQuad q(g);
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int gp = 0; gp < q.corners; ++gp) {
      const double cg = detail::interp_scalar(c, ids, q.N[gp], q.corners);
      const double eg = detail::interp_scalar(e, ids, q.N[gp], q.corners);
      Vec2 ug{};
      std::array<std::array<double, 3>, 2> du{};
      for (int a = 0; a < q.corners; ++a) {
        ug += q.N[gp][a] * u[ids[a]];
        for (int k = 0; k < g.dim; ++k) {
          du[0][k] += q.dN[gp][a][k] * u[ids[a]].re;
          du[1][k] += q.dN[gp][a][k] * u[ids[a]].im;
        }
      }
      for (int a = 0; a < q.corners; ++a) {
        Vec2 add = (q.point_weight * q.N[gp][a] * eg) * ug;
        for (int k = 0; k < g.dim; ++k) {
          add.re += q.point_weight * cg * du[0][k] * q.dN[gp][a][k];
          add.im += q.point_weight * cg * du[1][k] * q.dN[gp][a][k];
        }
        rhs[ids[a]] += add;
      }
    }
  });
  return rhs;
}

/// Accumulates, per node l, the exact sensitivity of the discrete reduced
/// misfit with respect to the parameter at node l for one source:
///   grad[l] += int_O N_l [ (H u).psi - v.psi - u.phi ]
///              - rdot_l int_O N_l [ Dv : Dpsi + Du : Dphi ]
/// where (u, v) are state fields and (phi, psi) the corresponding adjoints.
inline void accumulate_misfit_gradient(const Grid& g, const std::vector<Vec2>& u,
                                       const std::vector<Vec2>& v, const std::vector<Vec2>& phi,
                                       const std::vector<Vec2>& psi, const ComplexCoeff& H,
                                       const std::vector<double>& r_dot,
                                       std::vector<double>& grad) {
  const CellQuad q(g);
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int gp = 0; gp < q.corners; ++gp) {
      Vec2 ug{}, vg{}, fg{}, pg{};
      std::array<std::array<double, 3>, 2> du{}, dv{}, df{}, dp{};
      for (int a = 0; a < q.corners; ++a) {
        const int id = ids[a];
        const double na = q.N[gp][a];
        ug += na * u[id];
        vg += na * v[id];
        fg += na * phi[id];
        pg += na * psi[id];
        for (int k = 0; k < g.dim; ++k) {
          const double d = q.dN[gp][a][k];
          du[0][k] += d * u[id].re;
          du[1][k] += d * u[id].im;
          dv[0][k] += d * v[id].re;
          dv[1][k] += d * v[id].im;
          df[0][k] += d * phi[id].re;
          df[1][k] += d * phi[id].im;
          dp[0][k] += d * psi[id].re;
          dp[1][k] += d * psi[id].im;
        }
      }
      double grad_pair = 0.0;
      for (int c = 0; c < 2; ++c)
        for (int k = 0; k < g.dim; ++k) grad_pair += dv[c][k] * dp[c][k] + du[c][k] * df[c][k];
      const double hre = detail::interp_scalar(H.re.v, ids, q.N[gp], q.corners);
      const double him = detail::interp_scalar(H.im.v, ids, q.N[gp], q.corners);
      const double point_pair = dot(rotation_form(hre, him).apply(ug), pg) - dot(vg, pg) - dot(ug, fg);
      for (int a = 0; a < q.corners; ++a) {
        const int l = ids[a];
        const double w = q.point_weight * q.N[gp][a];
        grad[l] += w * (point_pair - r_dot[l] * grad_pair);
      }
    }
  });
}

/// Consistent (non-lumped) discrete L2 norm squared of a Vec2 nodal vector.
inline double mass_l2_norm_sq(const Grid& g, const std::vector<Vec2>& u) {
  const CellQuad q(g);
  double total = 0.0;
  for_each_cell(g, q, [&](const std::array<int, 8>& ids) {
    for (int gp = 0; gp < q.corners; ++gp) {
      const Vec2 ug = detail::interp_vec2(u, ids, q.N[gp], q.corners);
      total += q.point_weight * dot(ug, ug);
    }
  });
  return total;
}

}  // namespace fot

#pragma once

#include <vector>

#include "fot/grid.hpp"

namespace fot {

namespace detail {

/// 1D difference operator applied along one grid axis line by line.  Forward
/// rows hold at most 3 entries; transposed rows up to 5, where the one-sided
/// boundary stencils stack onto interior columns.
struct Band1D {
  struct Row {
    int cols[5] = {0, 0, 0, 0, 0};
    double vals[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    int k = 0;
  };
  std::vector<Row> rows;

  Band1D transposed() const {
    Band1D t;
    t.rows.resize(rows.size());
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      for (int e = 0; e < rows[i].k; ++e) {
        Row& r = t.rows[rows[i].cols[e]];
        require(r.k < 5, "band operator: transposed row overflow");
        r.cols[r.k] = i;
        r.vals[r.k] = rows[i].vals[e];
        ++r.k;
      }
    }
    return t;
  }
};

/// Second difference: centered at interior nodes, the nearest interior
/// stencil at the two boundary nodes (exact on quadratics).
inline Band1D second_difference(int n, double h) {
  Band1D op;
  op.rows.resize(n);
  const double c = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    const int base = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
    Band1D::Row& r = op.rows[i];
    r.k = 3;
    r.cols[0] = base - 1;
    r.cols[1] = base;
    r.cols[2] = base + 1;
    r.vals[0] = c;
    r.vals[1] = -2.0 * c;
    r.vals[2] = c;
  }
  return op;
}

/// First difference: centered at interior nodes, one-sided 3-point stencils
/// at the two boundary nodes (exact on quadratics).
inline Band1D first_difference(int n, double h) {
  Band1D op;
  op.rows.resize(n);
  const double c = 1.0 / (2.0 * h);
  for (int i = 0; i < n; ++i) {
    Band1D::Row& r = op.rows[i];
    if (i == 0) {
      r.k = 3;
      r.cols[0] = 0; r.cols[1] = 1; r.cols[2] = 2;
      r.vals[0] = -3.0 * c; r.vals[1] = 4.0 * c; r.vals[2] = -c;
    } else if (i == n - 1) {
      r.k = 3;
      r.cols[0] = n - 3; r.cols[1] = n - 2; r.cols[2] = n - 1;
      r.vals[0] = c; r.vals[1] = -4.0 * c; r.vals[2] = 3.0 * c;
    } else {
      r.k = 2;
      r.cols[0] = i - 1; r.cols[1] = i + 1;
      r.vals[0] = -c; r.vals[1] = c;
    }
  }
  return op;
}

inline void apply_along_axis(const Grid& g, int axis, const Band1D& op,
                             const std::vector<double>& in, std::vector<double>& out) {
  int stride = 1;
  for (int k = 0; k < axis; ++k) stride *= g.counts[k];
  const int n = g.counts[axis];
  const int total = g.node_count();
  const int block = stride * n;  // nodes spanned by one full line group
  for (int base = 0; base < total; base += block) {
    for (int off = 0; off < stride; ++off) {
      const int line = base + off;
      for (int i = 0; i < n; ++i) {
        const Band1D::Row& r = op.rows[i];
        double s = 0.0;
        for (int e = 0; e < r.k; ++e) s += r.vals[e] * in[line + r.cols[e] * stride];
        out[line + i * stride] = s;
      }
    }
  }
}

struct HessianOps {
  std::array<Band1D, 3> second, second_t, first, first_t;

  explicit HessianOps(const Grid& g) {
    for (int k = 0; k < g.dim; ++k) {
      second[k] = second_difference(g.counts[k], g.h[k]);
      second_t[k] = second[k].transposed();
      first[k] = first_difference(g.counts[k], g.h[k]);
      first_t[k] = first[k].transposed();
    }
  }
};

}  // namespace detail

/// Nodal second-difference Hessian of xi. Linear in xi, symmetric per node;
/// its exact transpose is hessian_transpose_apply below.
inline MatrixField discrete_hessian(const ScalarField& xi) {
  const Grid& g = xi.grid;
  const detail::HessianOps ops(g);
  MatrixField out(g);
  const int nn = g.node_count();
  std::vector<double> tmp(nn), tmp2(nn);

  for (int k = 0; k < g.dim; ++k) {
    detail::apply_along_axis(g, k, ops.second[k], xi.v, tmp);
    for (int j = 0; j < nn; ++j) out.v[j](k, k) = tmp[j];
  }
  for (int k = 0; k < g.dim; ++k) {
    for (int l = k + 1; l < g.dim; ++l) {
      detail::apply_along_axis(g, k, ops.first[k], xi.v, tmp);
      detail::apply_along_axis(g, l, ops.first[l], tmp, tmp2);
      for (int j = 0; j < nn; ++j) {
        out.v[j](k, l) = tmp2[j];
        out.v[j](l, k) = tmp2[j];
      }
    }
  }
  return out;
}

/// Exact transpose of discrete_hessian: returns the scalar field
/// sum_{k,l} (H_kl)^T W_kl for a nodal matrix field W.
inline ScalarField hessian_transpose_apply(const MatrixField& W) {
  const Grid& g = W.grid;
  const detail::HessianOps ops(g);
  ScalarField out(g, 0.0);
  const int nn = g.node_count();
  std::vector<double> comp(nn), tmp(nn), tmp2(nn);

  for (int k = 0; k < g.dim; ++k) {
    for (int j = 0; j < nn; ++j) comp[j] = W.v[j](k, k);
    detail::apply_along_axis(g, k, ops.second_t[k], comp, tmp);
    for (int j = 0; j < nn; ++j) out.v[j] += tmp[j];
  }
  for (int k = 0; k < g.dim; ++k) {
    for (int l = k + 1; l < g.dim; ++l) {
      // H_kl = first_l(first_k(.)) feeds both the (k,l) and (l,k) slots
      for (int j = 0; j < nn; ++j) comp[j] = W.v[j](k, l) + W.v[j](l, k);
      detail::apply_along_axis(g, l, ops.first_t[l], comp, tmp);
      detail::apply_along_axis(g, k, ops.first_t[k], tmp, tmp2);
      for (int j = 0; j < nn; ++j) out.v[j] += tmp2[j];
    }
  }
  return out;
}

}  // namespace fot

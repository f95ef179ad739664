#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "fot/assembly.hpp"

namespace fot {

enum class SolveMethod { iterative, direct };

struct LinearSolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  SolveMethod method = SolveMethod::direct;
  double wall_time = 0.0;  // seconds
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iters = 800;
  int restart = 50;
  int direct_threshold = 20000;  // unknowns at or below this go straight to the factorization
};

namespace detail {

inline std::vector<double> flatten(const std::vector<Vec2>& x) {
  std::vector<double> y(2 * x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    y[2 * j] = x[j].re;
    y[2 * j + 1] = x[j].im;
  }
  return y;
}

inline std::vector<Vec2> unflatten(const std::vector<double>& y) {
  std::vector<Vec2> x(y.size() / 2);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = {y[2 * j], y[2 * j + 1]};
  return x;
}

inline double vec_norm(const std::vector<Vec2>& x) {
  double s = 0.0;
  for (const auto& w : x) s += dot(w, w);
  return std::sqrt(s);
}

/// Inverses of the diagonal 2x2 blocks (Jacobi preconditioner).
inline std::vector<Mat2> block_diag_inverse(const SparseBlockOperator& op, bool transpose) {
  std::vector<Mat2> inv(op.rows());
  for (int j = 0; j < op.rows(); ++j) {
    Mat2 d{1, 0, 0, 1};
    for (int e = op.row_ptr[j]; e < op.row_ptr[j + 1]; ++e)
      if (op.col_idx[e] == j) d = op.blocks[e];
    if (transpose) d = d.transposed();
    const double det = d.rr * d.ii - d.ri * d.ir;
    if (std::abs(det) < 1e-300) {
      inv[j] = {1, 0, 0, 1};
    } else {
      inv[j] = {d.ii / det, -d.ri / det, -d.ir / det, d.rr / det};
    }
  }
  return inv;
}

}  // namespace detail

/// Cached solver for one assembled operator.  Small systems (and Krylov
/// stagnation fallbacks) use a sparse LU factorization, reused across all
/// right-hand sides and shared by forward and transpose solves; larger
/// systems run restarted GMRES with block-Jacobi preconditioning.
class LinearOperatorSolver {
 public:
  explicit LinearOperatorSolver(const SparseBlockOperator& op, SolverOptions opts = {})
      : op_(&op), opts_(opts) {}

  std::pair<std::vector<Vec2>, LinearSolveReport> solve(const std::vector<Vec2>& rhs,
                                                        bool transpose = false) const {
    require(static_cast<int>(rhs.size()) == op_->rows(), "solve: rhs size mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    LinearSolveReport report;
    std::vector<Vec2> x;
    const int unknowns = 2 * op_->rows();
    bool done = false;
    if (unknowns > opts_.direct_threshold) {
      done = gmres(rhs, transpose, x, report);
      if (!done) report.iterations = 0;  // fall through to the factorization
    }
    if (!done) {
      direct(rhs, transpose, x, report);
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report.relative_residual > opts_.tol) {
      throw solve_error("linear solve failed: relative residual " +
                        std::to_string(report.relative_residual) + " above tolerance " +
                        std::to_string(opts_.tol));
    }
    return {std::move(x), report};
  }

  const SolverOptions& options() const { return opts_; }

 private:
  void ensure_factorized() const {
    if (lu_ready_) return;
    const int nn = op_->rows();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(op_->blocks.size() * 4);
    for (int j = 0; j < nn; ++j) {
      for (int e = op_->row_ptr[j]; e < op_->row_ptr[j + 1]; ++e) {
        const int k = op_->col_idx[e];
        const Mat2& b = op_->blocks[e];
        trips.emplace_back(2 * j, 2 * k, b.rr);
        trips.emplace_back(2 * j, 2 * k + 1, b.ri);
        trips.emplace_back(2 * j + 1, 2 * k, b.ir);
        trips.emplace_back(2 * j + 1, 2 * k + 1, b.ii);
      }
    }
    Eigen::SparseMatrix<double> A(2 * nn, 2 * nn);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    lu_.compute(A);
    if (lu_.info() != Eigen::Success) throw solve_error("sparse LU factorization failed");
    lu_ready_ = true;
  }

  void direct(const std::vector<Vec2>& rhs, bool transpose, std::vector<Vec2>& x,
              LinearSolveReport& report) const {
    ensure_factorized();
    const auto b = detail::flatten(rhs);
    const Eigen::Map<const Eigen::VectorXd> bmap(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd sol = transpose ? lu_.transpose().solve(bmap).eval() : lu_.solve(bmap).eval();
    std::vector<double> sv(sol.data(), sol.data() + sol.size());
    x = detail::unflatten(sv);
    report.method = SolveMethod::direct;
    report.iterations = 1;
    report.relative_residual = residual(rhs, x, transpose);
  }

  double residual(const std::vector<Vec2>& rhs, const std::vector<Vec2>& x, bool transpose) const {
    std::vector<Vec2> ax;
    if (transpose)
      op_->apply_transpose(x, ax);
    else
      op_->apply(x, ax);
    double rn = 0.0, bn = 0.0;
    for (std::size_t j = 0; j < rhs.size(); ++j) {
      const Vec2 d = ax[j] - rhs[j];
      rn += dot(d, d);
      bn += dot(rhs[j], rhs[j]);
    }
    if (bn == 0.0) return std::sqrt(rn);
    return std::sqrt(rn / bn);
  }

  /// Right-preconditioned restarted GMRES; returns false on stagnation.
  bool gmres(const std::vector<Vec2>& rhs, bool transpose, std::vector<Vec2>& x,
             LinearSolveReport& report) const {
    const int nn = op_->rows();
    const auto minv = detail::block_diag_inverse(*op_, transpose);
    auto apply_op = [&](const std::vector<Vec2>& in, std::vector<Vec2>& out) {
      std::vector<Vec2> t(nn);
      for (int j = 0; j < nn; ++j) t[j] = transpose ? minv[j].apply_transpose(in[j]) : minv[j].apply(in[j]);
      if (transpose)
        op_->apply_transpose(t, out);
      else
        op_->apply(t, out);
    };

    const double bnorm = detail::vec_norm(rhs);
    x.assign(nn, Vec2{});
    if (bnorm == 0.0) {
      report.method = SolveMethod::iterative;
      report.iterations = 0;
      report.relative_residual = 0.0;
      return true;
    }

    const int m = opts_.restart;
    std::vector<std::vector<Vec2>> basis;
    std::vector<double> cs(m + 1), sn(m + 1), gvec(m + 1);
    std::vector<std::vector<double>> hess(m + 1, std::vector<double>(m, 0.0));
    std::vector<Vec2> y(nn);  // preconditioned accumulated solution
    int total_iters = 0;
    double res = 1.0;

    while (total_iters < opts_.max_iters) {
      std::vector<Vec2> r(nn);
      apply_op(y, r);
      for (int j = 0; j < nn; ++j) r[j] = rhs[j] - r[j];
      double beta = detail::vec_norm(r);
      const double cycle_start = beta / bnorm;
      if (cycle_start <= opts_.tol) {
        res = cycle_start;
        break;
      }
      basis.assign(1, r);
      for (auto& w : basis[0]) w *= 1.0 / beta;
      std::fill(gvec.begin(), gvec.end(), 0.0);
      gvec[0] = beta;

      int k = 0;
      for (; k < m && total_iters < opts_.max_iters; ++k, ++total_iters) {
        std::vector<Vec2> w(nn);
        apply_op(basis[k], w);
        for (int i = 0; i <= k; ++i) {
          double hik = 0.0;
          for (int j = 0; j < nn; ++j) hik += dot(w[j], basis[i][j]);
          hess[i][k] = hik;
          for (int j = 0; j < nn; ++j) w[j] -= hik * basis[i][j];
        }
        const double hkk = detail::vec_norm(w);
        hess[k + 1][k] = hkk;
        if (hkk > 0.0) {
          for (auto& ww : w) ww *= 1.0 / hkk;
          basis.push_back(std::move(w));
        }
        for (int i = 0; i < k; ++i) {
          const double t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
          hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
          hess[i][k] = t;
        }
        const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
        cs[k] = hess[k][k] / denom;
        sn[k] = hess[k + 1][k] / denom;
        hess[k][k] = denom;
        hess[k + 1][k] = 0.0;
        gvec[k + 1] = -sn[k] * gvec[k];
        gvec[k] = cs[k] * gvec[k];
        res = std::abs(gvec[k + 1]) / bnorm;
        if (res <= opts_.tol || hkk == 0.0) {
          ++k;
          ++total_iters;
          break;
        }
      }
      // back substitution and solution update
      std::vector<double> ycoef(k, 0.0);
      for (int i = k - 1; i >= 0; --i) {
        double s = gvec[i];
        for (int j = i + 1; j < k; ++j) s -= hess[i][j] * ycoef[j];
        ycoef[i] = s / hess[i][i];
      }
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < nn; ++j) y[j] += ycoef[i] * basis[i][j];
      if (res <= opts_.tol) break;
      // stagnation: the restart cycle barely reduced the residual
      if (res > 0.9 * cycle_start) return false;
    }

    for (int j = 0; j < nn; ++j) x[j] = transpose ? minv[j].apply_transpose(y[j]) : minv[j].apply(y[j]);
    report.method = SolveMethod::iterative;
    report.iterations = total_iters;
    report.relative_residual = residual(rhs, x, transpose);
    return report.relative_residual <= opts_.tol;
  }

  const SparseBlockOperator* op_;
  SolverOptions opts_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  mutable bool lu_ready_ = false;
};

/// One-shot solve of op x = rhs (or the transposed system).
inline std::pair<Vec2Field, LinearSolveReport> solve_linear(const SparseBlockOperator& op,
                                                            const std::vector<Vec2>& rhs, double tol,
                                                            bool transpose = false) {
  require(tol > 0.0 && tol <= 1e-4, "solve_linear: tol must lie in (0, 1e-4]");
  SolverOptions opts;
  opts.tol = tol;
  LinearOperatorSolver solver(op, opts);
  auto [x, report] = solver.solve(rhs, transpose);
  Vec2Field out(op.grid);
  out.v = std::move(x);
  return {std::move(out), report};
}

}  // namespace fot

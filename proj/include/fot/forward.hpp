#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "fot/coefficients.hpp"
#include "fot/solver.hpp"

namespace fot {

/// One light source: optional interior load S and boundary load s (at least
/// one must be nonzero), plus the measurement subset for this source.
struct SourceTerm {
  std::optional<Vec2Field> interior;  // S
  std::optional<Vec2Field> boundary;  // s, values on boundary nodes
};

/// Callback for per-solve diagnostics.
using SolveLogger = std::function<void(int source, const LinearSolveReport&)>;

/// The Robin operator assembled at a fixed parameter xi, with cached
/// factorization.  All excitation/emission/adjoint solves at this xi share it.
class ParameterizedOperator {
 public:
  ParameterizedOperator(const ProblemCoefficients& coeffs, const ScalarField& xi,
                        SolverOptions opts = {})
      : coeffs_(&coeffs), xi_(xi), robin_(boundary_subset(coeffs.grid(), "all")) {
    const Grid& g = coeffs.grid();
    check_same_grid(xi, g, "parameterized operator xi");
    require(xi.min_value() >= -1e-14 && xi.max_value() <= coeffs.box_M + 1e-14,
            "parameterized operator: xi outside [0, M]");
    op_ = assemble_system(g, assemble_A_xi(coeffs.diffusion, xi_, coeffs.box_M),
                          assemble_K_xi(coeffs.K, xi_), coeffs.gamma, robin_);
    solver_.emplace(op_, opts);
  }

  const Grid& grid() const { return coeffs_->grid(); }
  const ProblemCoefficients& coeffs() const { return *coeffs_; }
  const ScalarField& xi() const { return xi_; }
  const SparseBlockOperator& matrix() const { return op_; }
  const BoundarySet& robin_boundary() const { return robin_; }

  std::pair<std::vector<Vec2>, LinearSolveReport> solve(const std::vector<Vec2>& rhs,
                                                        bool transpose = false) const {
    return solver_->solve(rhs, transpose);
  }

  /// Excitation stage: Robin system with data (S_i, s_i).
  std::pair<Vec2Field, LinearSolveReport> solve_excitation(const SourceTerm& src) const {
    const Grid& g = grid();
    const Vec2Field* f = src.interior ? &*src.interior : nullptr;
    const Vec2Field* bd = src.boundary ? &*src.boundary : nullptr;
    require(f != nullptr || bd != nullptr, "source: need an interior or boundary load");
    const auto rhs = assemble_rhs(g, f, nullptr, bd, &robin_);
    auto [x, rep] = solve(rhs, false);
    Vec2Field u(g);
    u.v = std::move(x);
    return {std::move(u), rep};
  }

  /// Emission stage: volume source xi H u, homogeneous Robin data.
  std::pair<Vec2Field, LinearSolveReport> solve_emission(const Vec2Field& u) const {
    const Grid& g = grid();
    check_same_grid(u, g, "solve_emission u");
    const auto rhs = emission_load(g, xi_.v, coeffs_->H, u.v);
    auto [x, rep] = solve(rhs, false);
    Vec2Field v(g);
    v.v = std::move(x);
    return {std::move(v), rep};
  }

 private:
  const ProblemCoefficients* coeffs_;
  ScalarField xi_;
  BoundarySet robin_;
  SparseBlockOperator op_;
  std::optional<LinearOperatorSolver> solver_;
};

struct ForwardState {
  std::vector<Vec2Field> u;
  std::vector<Vec2Field> v;
  std::vector<std::vector<Vec2>> traces;  // v values at the nodes of each measurement set
  std::vector<LinearSolveReport> reports_u;
  std::vector<LinearSolveReport> reports_v;
};

inline std::vector<Vec2> extract_trace(const Vec2Field& v, const BoundarySet& gamma_i) {
  std::vector<Vec2> tr(gamma_i.nodes.size());
  for (std::size_t j = 0; j < gamma_i.nodes.size(); ++j) tr[j] = v.v[gamma_i.nodes[j]];
  return tr;
}

/// Runs the N independent excitation+emission solves and extracts the
/// boundary traces on each measurement set.
inline ForwardState forward(const ParameterizedOperator& op, const std::vector<SourceTerm>& sources,
                            const std::vector<BoundarySet>& measure, int threads = 1,
                            const SolveLogger& log = {}) {
  require(!sources.empty(), "forward: need at least one source");
  require(sources.size() == measure.size(), "forward: one measurement set per source");
  const int n = static_cast<int>(sources.size());
  ForwardState st;
  st.u.resize(n);
  st.v.resize(n);
  st.traces.resize(n);
  st.reports_u.resize(n);
  st.reports_v.resize(n);

  std::vector<std::exception_ptr> errors(n);
  auto run_one = [&](int i) {
    try {
      auto [u, ru] = op.solve_excitation(sources[i]);
      auto [v, rv] = op.solve_emission(u);
      st.u[i] = std::move(u);
      st.v[i] = std::move(v);
      st.traces[i] = extract_trace(st.v[i], measure[i]);
      st.reports_u[i] = ru;
      st.reports_v[i] = rv;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (threads > 1 && n > 1) {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(threads, n);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int i = 0; i < n; ++i) run_one(i);
  }

  for (int i = 0; i < n; ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw solve_error("forward solve failed for source " + std::to_string(i) + ": " + e.what());
      }
    }
    if (log) {
      log(i, st.reports_u[i]);
      log(i, st.reports_v[i]);
    }
  }
  return st;
}

}  // namespace fot

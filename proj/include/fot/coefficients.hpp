#pragma once

#include <cmath>

#include "fot/grid.hpp"

namespace fot {

/// Complex-valued coefficient stored as its two real nodal parts.  The
/// induced 2x2 matrix at a node is the rotation form [[re, -im], [im, re]],
/// so applying it to a Vec2 is complex multiplication.
struct ComplexCoeff {
  ScalarField re;
  ScalarField im;

  ComplexCoeff() = default;
  ComplexCoeff(ScalarField r, ScalarField i) : re(std::move(r)), im(std::move(i)) {
    require(re.grid == im.grid, "complex coefficient: re/im grid mismatch");
  }

  static ComplexCoeff constant(const Grid& g, double r, double i) {
    return {ScalarField(g, r), ScalarField(g, i)};
  }

  Mat2 at(int node) const { return rotation_form(re.v[node], im.v[node]); }
};

/// Diffusion data: matrix part A, the rational reaction-to-diffusion coupling
/// r(x,t) = lambda / (kappa(x) + t), and the spectral floor beta0 certifying
/// ellipticity of A + r(.,xi) I for every admissible xi.
struct DiffusionCoeff {
  MatrixField A;
  double lambda = 1.0;
  ScalarField kappa;
  double beta0 = 0.0;

  DiffusionCoeff() = default;

  /// box_m is the upper bound assumed for xi when certifying beta0.
  DiffusionCoeff(MatrixField A_, double lambda_, ScalarField kappa_, double box_m)
      : A(std::move(A_)), lambda(lambda_), kappa(std::move(kappa_)) {
    require(A.grid == kappa.grid, "diffusion coefficient: A/kappa grid mismatch");
    require(lambda > 0.0, "diffusion coefficient: lambda must be positive");
    require(box_m > 0.0, "diffusion coefficient: box bound must be positive");
    double min_eig_a = std::numeric_limits<double>::infinity();
    for (const auto& m : A.v) {
      require(m.max_asymmetry() <= 1e-12, "diffusion coefficient: A must be symmetric");
      const auto range = sym_eig_range(m);
      require(range[0] >= -1e-14, "diffusion coefficient: A must be nonnegative definite");
      min_eig_a = std::min(min_eig_a, range[0]);
    }
    double kappa_max = kappa.max_value();
    require(kappa.min_value() > 0.0, "diffusion coefficient: kappa must be positive");
    // worst case over 0 <= xi <= box_m
    beta0 = std::max(0.0, min_eig_a) + lambda / (kappa_max + box_m);
    require(beta0 > 0.0, "diffusion coefficient: degenerate spectral floor");
  }
};

/// Full coefficient tuple of the two-wavelength Robin problem.
struct ProblemCoefficients {
  DiffusionCoeff diffusion;
  ComplexCoeff K;
  ComplexCoeff H;
  double gamma = 1.0;
  double box_M = 1.0;  // admissible xi is [0, box_M]
  double a0 = 0.0;     // lower bound of k_R and kappa

  ProblemCoefficients() = default;

  ProblemCoefficients(DiffusionCoeff d, ComplexCoeff k, ComplexCoeff h, double gamma_, double box_m)
      : diffusion(std::move(d)), K(std::move(k)), H(std::move(h)), gamma(gamma_), box_M(box_m) {
    require(gamma > 0.0, "coefficients: gamma must be positive");
    require(box_M > 0.0, "coefficients: box bound M must be positive");
    require(K.re.grid == diffusion.A.grid && H.re.grid == diffusion.A.grid,
            "coefficients: K/H grid mismatch");
    a0 = std::min(K.re.min_value(), diffusion.kappa.min_value());
    require(a0 > 0.0, "coefficients: need k_R and kappa bounded below by a positive a0");
  }

  const Grid& grid() const { return diffusion.A.grid; }
};

/// r(x,t) = lambda / (kappa(x) + t); strictly positive, bounded by lambda/a0.
inline double eval_r(const DiffusionCoeff& d, int node, double t) {
  require(t >= 0.0, "eval_r: negative t");
  return d.lambda / (d.kappa.v[node] + t);
}

/// d/dt of eval_r: -lambda / (kappa(x) + t)^2, always negative.
inline double eval_r_dot(const DiffusionCoeff& d, int node, double t) {
  require(t >= 0.0, "eval_r_dot: negative t");
  const double den = d.kappa.v[node] + t;
  return -d.lambda / (den * den);
}

/// Nodal r(., xi) for an admissible xi.
inline ScalarField r_field(const DiffusionCoeff& d, const ScalarField& xi) {
  check_same_grid(xi, d.kappa.grid, "r_field");
  ScalarField out(xi.grid);
  for (int j = 0; j < xi.grid.node_count(); ++j) out.v[j] = eval_r(d, j, xi.v[j]);
  return out;
}

inline ScalarField r_dot_field(const DiffusionCoeff& d, const ScalarField& xi) {
  check_same_grid(xi, d.kappa.grid, "r_dot_field");
  ScalarField out(xi.grid);
  for (int j = 0; j < xi.grid.node_count(); ++j) out.v[j] = eval_r_dot(d, j, xi.v[j]);
  return out;
}

/// A_xi = A + r(., xi) I, symmetric positive definite nodewise.
inline MatrixField assemble_A_xi(const DiffusionCoeff& d, const ScalarField& xi, double box_m) {
  check_same_grid(xi, d.A.grid, "assemble_A_xi");
  require(xi.min_value() >= 0.0 && xi.max_value() <= box_m, "assemble_A_xi: xi outside [0, M]");
  MatrixField out = d.A;
  for (int j = 0; j < xi.grid.node_count(); ++j) {
    const double r = eval_r(d, j, xi.v[j]);
    for (int k = 0; k < xi.grid.dim; ++k) out.v[j](k, k) += r;
  }
  return out;
}

/// K_xi = K + xi I2 in rotation form: [[k_R + xi, -k_I], [k_I, k_R + xi]].
inline std::vector<Mat2> assemble_K_xi(const ComplexCoeff& K, const ScalarField& xi) {
  check_same_grid(xi, K.re.grid, "assemble_K_xi");
  require(xi.min_value() >= 0.0, "assemble_K_xi: xi must be nonnegative");
  std::vector<Mat2> out(xi.grid.node_count());
  for (int j = 0; j < xi.grid.node_count(); ++j)
    out[j] = rotation_form(K.re.v[j] + xi.v[j], K.im.v[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Biomedical preset
// ---------------------------------------------------------------------------

/// Frequency-domain optical parameters of the imaging preset.
struct BiomedicalParams {
  ScalarField mu_ai;   // endogenous absorption
  ScalarField mu_s;    // reduced scattering
  double omega = 0.0;  // modulation frequency
  double c = 1.0;      // speed of light in the medium
  double phi_q = 1.0;  // quantum efficiency, in [0,1]
  ScalarField tau;     // fluorophore lifetime
};

/// Builds the coefficient tuple of the photon-diffusion model:
///   A_xi = (3 (mu_ai + mu_s + xi))^{-1} I    (up to a tiny ellipticity floor)
///   k    = mu_ai + xi + i omega / c
///   h    = phi_q / (1 - i omega tau)
/// realized through the rational coupling with lambda = 1/3 and
/// kappa = mu_ai + mu_s.  The floor eps keeps the stored matrix part strictly
/// admissible; it perturbs the diffusion by eps only.
inline ProblemCoefficients preset_biomedical(const BiomedicalParams& bp, double gamma, double box_m,
                                             double eps = 1e-8) {
  const Grid& g = bp.mu_ai.grid;
  check_same_grid(bp.mu_s, g, "preset_biomedical mu_s");
  check_same_grid(bp.tau, g, "preset_biomedical tau");
  require(bp.mu_ai.min_value() > 0.0 && bp.mu_s.min_value() > 0.0,
          "preset_biomedical: optical parameters must be positive");
  require(bp.omega >= 0.0, "preset_biomedical: omega must be nonnegative");
  require(bp.c > 0.0, "preset_biomedical: speed of light must be positive");
  require(bp.phi_q >= 0.0 && bp.phi_q <= 1.0, "preset_biomedical: phi_q in [0,1]");
  require(bp.tau.min_value() >= 0.0, "preset_biomedical: tau must be nonnegative");

  MatrixField A(g);
  for (auto& m : A.v) m = SmallMat::scaled_identity(g.dim, eps);
  ScalarField kappa(g);
  for (int j = 0; j < g.node_count(); ++j) kappa.v[j] = bp.mu_ai.v[j] + bp.mu_s.v[j];
  DiffusionCoeff diffusion(std::move(A), 1.0 / 3.0, std::move(kappa), box_m);

  ComplexCoeff K(bp.mu_ai, ScalarField(g, bp.omega / bp.c));
  ScalarField h_re(g), h_im(g);
  for (int j = 0; j < g.node_count(); ++j) {
    const double wt = bp.omega * bp.tau.v[j];
    const double den = 1.0 + wt * wt;
    h_re.v[j] = bp.phi_q / den;
    h_im.v[j] = bp.phi_q * wt / den;
  }
  return ProblemCoefficients(std::move(diffusion), std::move(K),
                             ComplexCoeff(std::move(h_re), std::move(h_im)), gamma, box_m);
}

}  // namespace fot

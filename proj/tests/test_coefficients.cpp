#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <complex>

#include "fot/coefficients.hpp"

using namespace fot;
using Catch::Approx;

namespace {

Grid small_grid() { return build_grid(2, {0, 0}, {1, 1}, {5, 5, 1}); }

DiffusionCoeff identity_diffusion(const Grid& g, double lambda, double kappa, double box_m) {
  MatrixField a(g);
  for (auto& m : a.v) m = SmallMat::identity(g.dim);
  return DiffusionCoeff(std::move(a), lambda, ScalarField(g, kappa), box_m);
}

}  // namespace

TEST_CASE("eval_r direct values, bounds and monotonicity") {
  const Grid g = small_grid();
  const auto d1 = identity_diffusion(g, 1.0, 1.0, 1.0);
  REQUIRE(eval_r(d1, 0, 0.0) == Approx(1.0));
  const auto d2 = identity_diffusion(g, 2.0, 1.0, 1.0);
  REQUIRE(eval_r(d2, 0, 1.0) == Approx(1.0));

  double prev = eval_r(d1, 0, 0.0);
  for (double t : {0.5, 1.0, 10.0, 1000.0, 1e6}) {
    const double r = eval_r(d1, 0, t);
    REQUIRE(r > 0.0);
    REQUIRE(r < prev);
    prev = r;
  }
  REQUIRE(eval_r(d1, 0, 1e12) < 1e-11);
  REQUIRE_THROWS(eval_r(d1, 0, -0.5));

  // |r| <= lambda/a0 and r >= lambda/(max kappa + M) over random admissible t
  RngStream rng(4, 0);
  const double a0 = 1.0, M = 1.0;
  for (int k = 0; k < 50; ++k) {
    const double t = rng.uniform(0.0, M);
    const double r = eval_r(d1, 0, t);
    REQUIRE(r <= 1.0 / a0 + 1e-15);
    REQUIRE(r >= 1.0 / (1.0 + M) - 1e-15);
  }
}

TEST_CASE("eval_r_dot values and finite-difference oracle") {
  const Grid g = small_grid();
  const auto d1 = identity_diffusion(g, 1.0, 2.0, 1.0);
  REQUIRE(eval_r_dot(d1, 0, 0.0) == Approx(-0.25));
  const auto d2 = identity_diffusion(g, 1.0, 1.0, 1.0);
  REQUIRE(eval_r_dot(d2, 0, 1.0) == Approx(-0.25));
  REQUIRE_THROWS(eval_r_dot(d1, 0, -1.0));

  RngStream rng(11, 0);
  const double eps = 1e-4;
  for (int k = 0; k < 20; ++k) {
    const double t = rng.uniform(0.1, 2.0);
    const double fd = (eval_r(d1, 0, t + eps) - eval_r(d1, 0, t - eps)) / (2.0 * eps);
    REQUIRE(std::abs(eval_r_dot(d1, 0, t) - fd) < 1e-8);
    REQUIRE(eval_r_dot(d1, 0, t) < 0.0);
  }
}

TEST_CASE("assemble_A_xi identity case and perturbation bound") {
  const Grid g = small_grid();
  const auto d = identity_diffusion(g, 1.0, 1.0, 1.0);
  const auto a0 = assemble_A_xi(d, ScalarField(g, 0.0), 1.0);
  for (const auto& m : a0.v) {
    REQUIRE(m(0, 0) == Approx(2.0));
    REQUIRE(m(1, 1) == Approx(2.0));
    REQUIRE(m(0, 1) == Approx(0.0));
  }

  const double big_m = 1e6;
  const auto dbig = identity_diffusion(g, 1.0, 1.0, big_m);
  const auto am = assemble_A_xi(dbig, ScalarField(g, big_m), big_m);
  // the subtraction 1 + r - 1 carries an eps(1)-sized rounding error
  for (const auto& m : am.v) REQUIRE(std::abs(m(0, 0) - 1.0) <= 1.0 / (1.0 + big_m) + 1e-15);

  REQUIRE_THROWS(assemble_A_xi(d, ScalarField(g, 2.0), 1.0));
  REQUIRE_THROWS(assemble_A_xi(d, ScalarField(g, -0.25), 1.0));
}

TEST_CASE("assemble_A_xi keeps the spectrum above the spectrum of A") {
  // oracle: per-node dense symmetric eigensolver
  const Grid g = small_grid();
  RngStream rng(21, 0);
  MatrixField a(g);
  for (auto& m : a.v) {
    Eigen::Matrix2d r;
    r << rng.uniform(0.5, 2.0), rng.uniform(-0.3, 0.3), 0.0, rng.uniform(0.5, 2.0);
    r(1, 0) = r(0, 1);
    Eigen::Matrix2d spd = r.transpose() * r + 0.1 * Eigen::Matrix2d::Identity();
    m(0, 0) = spd(0, 0);
    m(0, 1) = spd(0, 1);
    m(1, 0) = spd(1, 0);
    m(1, 1) = spd(1, 1);
  }
  const double M = 2.0;
  DiffusionCoeff d(a, 0.7, ScalarField(g, 1.3), M);
  ScalarField xi(g);
  for (auto& x : xi.v) x = rng.uniform(0.0, M);
  const auto axi = assemble_A_xi(d, xi, M);
  for (int j = 0; j < g.node_count(); ++j) {
    Eigen::Matrix2d ma, mx;
    ma << a.v[j](0, 0), a.v[j](0, 1), a.v[j](1, 0), a.v[j](1, 1);
    mx << axi.v[j](0, 0), axi.v[j](0, 1), axi.v[j](1, 0), axi.v[j](1, 1);
    const double min_a = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(ma).eigenvalues().minCoeff();
    const double min_x = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(mx).eigenvalues().minCoeff();
    REQUIRE(min_x >= min_a);
    REQUIRE(min_x >= d.beta0 - 1e-12);
    REQUIRE(axi.v[j].max_asymmetry() <= 1e-14);
  }
}

TEST_CASE("sym_eig_range agrees with the dense eigensolver") {
  RngStream rng(33, 0);
  for (int trial = 0; trial < 50; ++trial) {
    SmallMat m(3);
    Eigen::Matrix3d e;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        const double val = rng.uniform(-1.0, 1.0);
        m(i, j) = val;
        m(j, i) = val;
        e(i, j) = val;
        e(j, i) = val;
      }
    const auto range = sym_eig_range(m);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(e);
    REQUIRE(range[0] == Approx(es.eigenvalues().minCoeff()).margin(1e-10));
    REQUIRE(range[1] == Approx(es.eigenvalues().maxCoeff()).margin(1e-10));
  }
}

TEST_CASE("assemble_K_xi rotation form") {
  const Grid g = small_grid();
  const auto k1 = assemble_K_xi(ComplexCoeff::constant(g, 1.0, 0.0), ScalarField(g, 0.0));
  REQUIRE(k1[0].rr == Approx(1.0));
  REQUIRE(k1[0].ri == Approx(0.0));
  REQUIRE(k1[0].ir == Approx(0.0));
  REQUIRE(k1[0].ii == Approx(1.0));

  const auto k2 = assemble_K_xi(ComplexCoeff::constant(g, 1.0, 2.0), ScalarField(g, 3.0));
  REQUIRE(k2[0].rr == Approx(4.0));
  REQUIRE(k2[0].ri == Approx(-2.0));
  REQUIRE(k2[0].ir == Approx(2.0));
  REQUIRE(k2[0].ii == Approx(4.0));

  // (K_xi w) . w = (k_R + xi) |w|^2
  RngStream rng(5, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec2 w{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double lhs = dot(k2[0].apply(w), w);
    REQUIRE(lhs == Approx((1.0 + 3.0) * dot(w, w)).margin(1e-13));
  }
  REQUIRE_THROWS(assemble_K_xi(ComplexCoeff::constant(g, 1.0, 0.0), ScalarField(g, -1.0)));
}

TEST_CASE("rotation form multiplies like complex numbers") {
  RngStream rng(8, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double hr = rng.uniform(-3, 3), hi = rng.uniform(-3, 3);
    const Vec2 w{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto prod = rotation_form(hr, hi).apply(w);
    const std::complex<double> z = std::complex<double>(hr, hi) * std::complex<double>(w.re, w.im);
    REQUIRE(prod.re == z.real());
    REQUIRE(prod.im == z.imag());
  }
}

TEST_CASE("biomedical preset") {
  const Grid g = small_grid();

  SECTION("zero frequency kills the imaginary parts") {
    BiomedicalParams bp{ScalarField(g, 0.2), ScalarField(g, 0.4), 0.0, 1.0, 0.7, ScalarField(g, 1.0)};
    const auto pc = preset_biomedical(bp, 1.0, 1.0);
    REQUIRE(pc.K.im.max_value() == Approx(0.0));
    REQUIRE(pc.H.re.v[0] == Approx(0.7));
    REQUIRE(pc.H.im.v[0] == Approx(0.0));
    REQUIRE(pc.K.re.v[0] == Approx(0.2));
  }

  SECTION("mu_ai = mu_s = 1/6 gives the identity diffusion at xi = 0") {
    BiomedicalParams bp{ScalarField(g, 1.0 / 6.0), ScalarField(g, 1.0 / 6.0), 0.0, 1.0, 1.0,
                        ScalarField(g, 0.0)};
    const auto pc = preset_biomedical(bp, 1.0, 1.0);
    const auto axi = assemble_A_xi(pc.diffusion, ScalarField(g, 0.0), 1.0);
    for (const auto& m : axi.v) {
      REQUIRE(std::abs(m(0, 0) - 1.0) < 1e-7);
      REQUIRE(std::abs(m(1, 1) - 1.0) < 1e-7);
      REQUIRE(m(0, 1) == Approx(0.0));
    }
    // exact reference: A_xi = (3(mu_ai + mu_s + xi))^{-1} I on a random xi
    RngStream rng(14, 0);
    ScalarField xi(g);
    for (auto& x : xi.v) x = rng.uniform(0.0, 1.0);
    const auto a2 = assemble_A_xi(pc.diffusion, xi, 1.0);
    for (int j = 0; j < g.node_count(); ++j) {
      const double expected = 1.0 / (3.0 * (1.0 / 6.0 + 1.0 / 6.0 + xi.v[j]));
      REQUIRE(std::abs(a2.v[j](0, 0) - expected) < 1e-7);
    }
  }

  SECTION("phi_q = 1, omega = tau = 1 gives h = (1/2, 1/2)") {
    BiomedicalParams bp{ScalarField(g, 0.5), ScalarField(g, 0.5), 1.0, 1.0, 1.0, ScalarField(g, 1.0)};
    const auto pc = preset_biomedical(bp, 1.0, 1.0);
    REQUIRE(pc.H.re.v[0] == Approx(0.5));
    REQUIRE(pc.H.im.v[0] == Approx(0.5));
    REQUIRE(pc.K.im.v[0] == Approx(1.0));
  }

  SECTION("nonpositive optical parameters are rejected") {
    BiomedicalParams bad{ScalarField(g, 0.0), ScalarField(g, 0.4), 0.0, 1.0, 1.0, ScalarField(g, 0.0)};
    REQUIRE_THROWS(preset_biomedical(bad, 1.0, 1.0));
    BiomedicalParams bad2{ScalarField(g, 0.1), ScalarField(g, 0.4), -1.0, 1.0, 1.0, ScalarField(g, 0.0)};
    REQUIRE_THROWS(preset_biomedical(bad2, 1.0, 1.0));
  }
}

TEST_CASE("coefficient validation") {
  const Grid g = small_grid();
  MatrixField skew(g);
  for (auto& m : skew.v) {
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(0, 1) = 0.5;
    m(1, 0) = -0.5;
  }
  REQUIRE_THROWS(DiffusionCoeff(skew, 1.0, ScalarField(g, 1.0), 1.0));
  REQUIRE_THROWS(identity_diffusion(g, -1.0, 1.0, 1.0));

  auto d = identity_diffusion(g, 1.0, 1.0, 1.0);
  REQUIRE_THROWS(ProblemCoefficients(d, ComplexCoeff::constant(g, 0.0, 0.0),
                                     ComplexCoeff::constant(g, 1.0, 0.0), 1.0, 1.0));
  REQUIRE_THROWS(ProblemCoefficients(d, ComplexCoeff::constant(g, 1.0, 0.0),
                                     ComplexCoeff::constant(g, 1.0, 0.0), -1.0, 1.0));
  const ProblemCoefficients ok(d, ComplexCoeff::constant(g, 0.8, 0.1),
                               ComplexCoeff::constant(g, 1.0, 0.0), 1.0, 1.0);
  REQUIRE(ok.a0 == Approx(0.8));
}

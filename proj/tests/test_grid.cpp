#include <catch2/catch_amalgamated.hpp>

#include "fot/field_io.hpp"
#include "fot/grid.hpp"
#include "fot/hessian.hpp"

using namespace fot;
using Catch::Approx;

namespace {

Grid unit_square(int n) { return build_grid(2, {0, 0}, {1, 1}, {n, n, 1}); }

ScalarField random_field(const Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  RngStream rng(seed, 7);
  ScalarField f(g);
  for (auto& x : f.v) x = rng.uniform(lo, hi);
  return f;
}

}  // namespace

TEST_CASE("build_grid spacing and node counts") {
  const Grid g = unit_square(3);
  REQUIRE(g.h[0] == Approx(0.5));
  REQUIRE(g.h[1] == Approx(0.5));
  REQUIRE(g.node_count() == 9);

  const Grid r = build_grid(2, {0, 0}, {2, 1}, {5, 3, 1});
  REQUIRE(r.h[0] == Approx(0.5));
  REQUIRE(r.h[1] == Approx(0.5));

  REQUIRE_THROWS_WITH(build_grid(2, {0, 0}, {1, 1}, {2, 3, 1}),
                      Catch::Matchers::ContainsSubstring("counts too small"));
  REQUIRE_THROWS(build_grid(2, {0, 0}, {0, 1}, {3, 3, 1}));
  REQUIRE_THROWS(build_grid(4, {0, 0}, {1, 1}, {3, 3, 1}));
}

TEST_CASE("flat/unflat is a bijection with axis 0 fastest") {
  const Grid g = build_grid(3, {0, 0, 0}, {1, 2, 3}, {3, 4, 5});
  for (int j = 0; j < g.node_count(); ++j) REQUIRE(g.flat(g.unflat(j)) == j);
  // axis 0 fastest: consecutive flats differ in index 0
  REQUIRE(g.unflat(1)[0] == 1);
  REQUIRE(g.unflat(1)[1] == 0);
  // coordinates reproduce lo + idx*h
  const auto x = g.coord(g.flat({2, 3, 4}));
  REQUIRE(x[0] == Approx(1.0));
  REQUIRE(x[1] == Approx(2.0));
  REQUIRE(x[2] == Approx(3.0));
}

TEST_CASE("boundary_subset face counts and errors") {
  const Grid g = unit_square(3);
  REQUIRE(boundary_subset(g, "x0_min").faces.size() == 2);
  REQUIRE(boundary_subset(g, "all").faces.size() == 8);
  REQUIRE_THROWS_WITH(boundary_subset(g, "x5_min"),
                      Catch::Matchers::ContainsSubstring("unknown selector"));
  REQUIRE_THROWS(boundary_subset(g, "bogus"));

  // windowed side: nodes 0..1 of the left edge -> single face
  REQUIRE(boundary_subset(g, "x0_min[0:1]").faces.size() == 1);
}

TEST_CASE("boundary_subset(all) tiles the box surface") {
  const Grid g2 = build_grid(2, {0, 0}, {2, 1}, {9, 5, 1});
  const auto all2 = boundary_subset(g2, "all");
  REQUIRE(all2.area == Approx(g2.box_surface_area()).epsilon(1e-12));

  const Grid g3 = build_grid(3, {0, 0, 0}, {1, 2, 3}, {4, 5, 6});
  const auto all3 = boundary_subset(g3, "all");
  REQUIRE(all3.area == Approx(g3.box_surface_area()).epsilon(1e-12));

  // faces are disjoint: every node weight is positive and the weights sum to the area
  double wsum = 0.0;
  for (double w : all3.node_w) {
    REQUIRE(w > 0.0);
    wsum += w;
  }
  REQUIRE(wsum == Approx(all3.area).epsilon(1e-12));
}

TEST_CASE("integrate_volume basics") {
  const Grid g = unit_square(5);
  REQUIRE(integrate_volume(ScalarField(g, 1.0)) == Approx(1.0).epsilon(1e-13));
  const auto fx = ScalarField::sample(g, [](const auto& x) { return x[0]; });
  REQUIRE(integrate_volume(fx) == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("integrate_volume of x^2 y^2 approaches 1/9") {
  const Grid g = unit_square(33);
  const auto f = ScalarField::sample(g, [](const auto& x) { return x[0] * x[0] * x[1] * x[1]; });
  REQUIRE(std::abs(integrate_volume(f) - 1.0 / 9.0) < 1e-3);
}

TEST_CASE("quadrature is exact for multi-linear fields") {
  // oracle: the integral of the interpolant equals the node-weight sum, and
  // for a multi-linear function both equal the analytic integral
  const Grid g = build_grid(2, {0, 0}, {2, 3}, {7, 5, 1});
  const auto f = ScalarField::sample(
      g, [](const auto& x) { return 2.0 + 0.5 * x[0] - x[1] + 0.25 * x[0] * x[1]; });
  // int over [0,2]x[0,3]: 12 + 3 - 9 + 0.25*2*4.5/... computed analytically:
  // int 2 = 12, int 0.5x = 0.5*2*3 = 3, int -y = -9, int 0.25xy = 0.25*2*4.5 = 2.25
  const double exact = 12.0 + 3.0 - 9.0 + 2.25;
  REQUIRE(integrate_volume(f) == Approx(exact).epsilon(1e-13));

  const auto w = volume_node_weights(g);
  double lumped = 0.0;
  for (int j = 0; j < g.node_count(); ++j) lumped += w[j] * f.v[j];
  REQUIRE(lumped == Approx(integrate_volume(f)).epsilon(1e-12));
}

TEST_CASE("volume node weights integrate arbitrary nodal fields like the cell loop") {
  const Grid g3 = build_grid(3, {0, 0, 0}, {1, 1, 2}, {4, 3, 5});
  const auto f = random_field(g3, 11);
  const auto w = volume_node_weights(g3);
  double lumped = 0.0;
  for (int j = 0; j < g3.node_count(); ++j) lumped += w[j] * f.v[j];
  REQUIRE(lumped == Approx(integrate_volume(f)).epsilon(1e-12));
}

TEST_CASE("integrate_surface basics") {
  const Grid g = unit_square(5);
  const ScalarField one(g, 1.0);
  REQUIRE(integrate_surface(one, boundary_subset(g, "all")) == Approx(4.0).epsilon(1e-13));
  REQUIRE(integrate_surface(one, boundary_subset(g, "x0_min")) == Approx(1.0).epsilon(1e-13));
  // g(x) = x on the bottom side y = 0
  const auto fx = ScalarField::sample(g, [](const auto& x) { return x[0]; });
  REQUIRE(integrate_surface(fx, boundary_subset(g, "x1_min")) == Approx(0.5).epsilon(1e-13));
  REQUIRE_THROWS(boundary_subset(g, "x0_min[0:0]"));
}

TEST_CASE("discrete_hessian reproduces quadratics exactly") {
  const Grid g = build_grid(2, {0, 0}, {1, 1}, {7, 6, 1});
  const auto fxx = ScalarField::sample(g, [](const auto& x) { return x[0] * x[0]; });
  const auto h = discrete_hessian(fxx);
  for (const auto& m : h.v) {
    REQUIRE(m(0, 0) == Approx(2.0).margin(1e-11));
    REQUIRE(m(0, 1) == Approx(0.0).margin(1e-11));
    REQUIRE(m(1, 0) == Approx(0.0).margin(1e-11));
    REQUIRE(m(1, 1) == Approx(0.0).margin(1e-11));
  }

  const auto c = discrete_hessian(ScalarField(g, 3.25));
  for (const auto& m : c.v)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) REQUIRE(m(i, j) == Approx(0.0).margin(1e-12));

  const auto fxy = ScalarField::sample(g, [](const auto& x) { return x[0] * x[1]; });
  const auto hxy = discrete_hessian(fxy);
  for (const auto& m : hxy.v) {
    REQUIRE(m(0, 0) == Approx(0.0).margin(1e-11));
    REQUIRE(m(0, 1) == Approx(1.0).margin(1e-11));
    REQUIRE(m(1, 0) == Approx(1.0).margin(1e-11));
  }
}

TEST_CASE("discrete_hessian 3D quadratic") {
  const Grid g = build_grid(3, {0, 0, 0}, {1, 1, 1}, {5, 4, 3});
  const auto f = ScalarField::sample(
      g, [](const auto& x) { return x[0] * x[0] + 2.0 * x[1] * x[2] - x[2] * x[2]; });
  const auto h = discrete_hessian(f);
  for (const auto& m : h.v) {
    REQUIRE(m(0, 0) == Approx(2.0).margin(1e-10));
    REQUIRE(m(1, 2) == Approx(2.0).margin(1e-10));
    REQUIRE(m(2, 2) == Approx(-2.0).margin(1e-10));
    REQUIRE(m(0, 1) == Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("discrete_hessian is linear") {
  const Grid g = unit_square(9);
  const auto a = random_field(g, 21);
  const auto b = random_field(g, 22);
  ScalarField combo(g);
  for (int j = 0; j < g.node_count(); ++j) combo.v[j] = 2.5 * a.v[j] - 1.25 * b.v[j];
  const auto ha = discrete_hessian(a);
  const auto hb = discrete_hessian(b);
  const auto hc = discrete_hessian(combo);
  for (int j = 0; j < g.node_count(); ++j)
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        REQUIRE(hc.v[j](i, k) ==
                Approx(2.5 * ha.v[j](i, k) - 1.25 * hb.v[j](i, k)).margin(1e-12));
}

TEST_CASE("hessian transpose identity <H(xi), W> = <xi, H^T(W)>") {
  for (int dim : {2, 3}) {
    const Grid g = dim == 2 ? unit_square(8) : build_grid(3, {0, 0, 0}, {1, 1, 1}, {5, 4, 4});
    const auto xi = random_field(g, 31);
    RngStream rng(77, 3);
    MatrixField w(g);
    for (auto& m : w.v)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = rng.uniform(-1, 1);

    const auto hxi = discrete_hessian(xi);
    const auto htw = hessian_transpose_apply(w);
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j < g.node_count(); ++j) {
      for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) lhs += hxi.v[j](i, k) * w.v[j](i, k);
      rhs += xi.v[j] * htw.v[j];
    }
    REQUIRE(lhs == Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("field file round trip is bit exact") {
  const Grid g = unit_square(4);
  const auto f = random_field(g, 5);
  const std::string path = "test_grid_roundtrip.field";
  write_field(path, f);
  const auto f2 = read_scalar_field(path);
  REQUIRE(f2.grid == g);
  for (int j = 0; j < g.node_count(); ++j) REQUIRE(f2.v[j] == f.v[j]);

  Vec2Field vf(g);
  RngStream rng(9, 1);
  for (auto& w : vf.v) w = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  write_field("test_grid_roundtrip_v.field", vf);
  const auto vf2 = read_vec2_field("test_grid_roundtrip_v.field");
  for (int j = 0; j < g.node_count(); ++j) {
    REQUIRE(vf2.v[j].re == vf.v[j].re);
    REQUIRE(vf2.v[j].im == vf.v[j].im);
  }
  std::remove("test_grid_roundtrip.field");
  std::remove("test_grid_roundtrip_v.field");
}

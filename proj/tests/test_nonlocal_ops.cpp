#include <cmath>

#include "doctest.h"
#include "rvk/nonlocal_ops.hpp"
#include "test_util.hpp"

using namespace rvk;

namespace {

KernelClass const_class(double sigma, int dim, double lam = 1.0,
                        double Lam = 1.0) {
  KernelClass c;
  c.profile = {sigma, {SlowFamily::Constant, 0.0}, 0.5};
  c.lambda = lam;
  c.Lambda = Lam;
  c.dim = dim;
  return c;
}

FieldFunction bump_1d() {
  return FieldFunction::make_analytic(
      1, [](const Point& x) { return std::max(0.0, 1.0 - x[0] * x[0]); }, 1.0,
      1.0);
}

FieldFunction bump_2d() {
  return FieldFunction::make_analytic(
      2,
      [](const Point& x) {
        return std::max(0.0, 1.0 - x[0] * x[0] - x[1] * x[1]);
      },
      1.0, 1.0);
}

}  // namespace

TEST_CASE("second difference basics") {
  FieldFunction u = bump_1d();
  CHECK(second_difference(u, {0.0, 0.0}, {0.5, 0.0}) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(second_difference(u, {0.0, 0.0}, {2.0, 0.0}) ==
        doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("pucci of the 1d bump at the origin") {
  FieldFunction u = bump_1d();
  KernelClass c = const_class(1.0, 1);
  double mp = pucci_plus(u, {0.0, 0.0}, c);
  CHECK(mp == doctest::Approx(-8.0).epsilon(1e-6));
  // lambda = Lambda makes the extremal operators coincide with the linear one
  KernelSpec k{c, WeightKind::ConstLower, 0.0};
  CHECK(linear_apply(u, {0.0, 0.0}, k) == doctest::Approx(mp).epsilon(1e-12));
  CHECK(pucci_minus(u, {0.0, 0.0}, c) == doctest::Approx(mp).epsilon(1e-12));
  // truncation keeps only |y| <= 1
  CHECK(pucci_truncated(u, {0.0, 0.0}, c, true) ==
        doctest::Approx(-4.0).epsilon(1e-6));
}

TEST_CASE("pucci of the 2d bump at the origin") {
  FieldFunction u = bump_2d();
  KernelClass c = const_class(1.0, 2);
  CHECK(pucci_plus(u, {0.0, 0.0}, c) ==
        doctest::Approx(-8.0 * M_PI).epsilon(1e-5));
}

TEST_CASE("duality and positive homogeneity on seeded fields") {
  for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
    FieldFunction u = testutil::seeded_bumps(1, seed);
    FieldFunction nu = u.scaled(-1.0);
    FieldFunction cu = u.scaled(2.5);
    KernelClass c = const_class(1.3, 1, 1.0, 2.0);
    Point x{0.2, 0.0};
    double p = pucci_plus(u, x, c), m = pucci_minus(u, x, c);
    double scale = std::max({std::abs(p), std::abs(m), 1e-6});
    CHECK(std::abs(pucci_plus(nu, x, c) + m) <= 1e-12 * scale);
    CHECK(std::abs(pucci_minus(nu, x, c) + p) <= 1e-12 * scale);
    CHECK(std::abs(pucci_plus(cu, x, c) - 2.5 * p) <= 1e-11 * scale);
    CHECK(std::abs(pucci_minus(cu, x, c) - 2.5 * m) <= 1e-11 * scale);
    CHECK(m <= p + 1e-12 * scale);
  }
}

TEST_CASE("sandwich: every class member sits between the extremals") {
  FieldFunction u = testutil::seeded_bumps(1, 77);
  KernelClass c = const_class(0.9, 1, 0.5, 2.0);
  Point x{-0.3, 0.0};
  double lo = pucci_minus(u, x, c), hi = pucci_plus(u, x, c);
  for (WeightKind w :
       {WeightKind::ConstLower, WeightKind::ConstUpper,
        WeightKind::RadialBlend}) {
    KernelSpec k{c, w, 0.4};
    double v = linear_apply(u, x, k);
    double tol = 1e-10 * std::max(1.0, std::abs(hi) + std::abs(lo));
    CHECK(v >= lo - tol);
    CHECK(v <= hi + tol);
  }
}

TEST_CASE("inf-sup: degenerate family equals linear, ellipticity sandwich") {
  FieldFunction u = testutil::seeded_bumps(1, 5);
  FieldFunction v = testutil::seeded_bumps(1, 6);
  KernelClass c = const_class(1.1, 1, 0.5, 2.0);
  Point x{0.1, 0.0};

  KernelSpec k{c, WeightKind::RadialBlend, 1.0};
  OperatorFamily single{{{k}}};
  CHECK(infsup_apply(u, x, single) ==
        doctest::Approx(linear_apply(u, x, k)).epsilon(1e-13));

  OperatorFamily fam;
  for (int b = 0; b < 3; ++b) {
    std::vector<KernelSpec> grp;
    for (int a = 0; a < 3; ++a)
      grp.push_back({c, WeightKind::RadialBlend, 0.7 * a + 1.3 * b});
    fam.groups.push_back(grp);
  }
  FieldFunction upv = FieldFunction::make_analytic(
      1, [&](const Point& p) { return u.eval(p) + v.eval(p); },
      u.bound + v.bound, *u.c11_modulus + *v.c11_modulus);
  double diff = infsup_apply(upv, x, fam) - infsup_apply(u, x, fam);
  double lo = pucci_minus(v, x, c), hi = pucci_plus(v, x, c);
  double tol = 1e-8 * std::max(1.0, std::abs(lo) + std::abs(hi));
  CHECK(diff >= lo - tol);
  CHECK(diff <= hi + tol);

  CHECK_THROWS_AS(infsup_apply(u, x, OperatorFamily{}), EmptyFamily);
  OperatorFamily bad;
  bad.groups.push_back({});
  CHECK_THROWS_AS(infsup_apply(u, x, bad), EmptyFamily);
}

TEST_CASE("scale covariance for the Constant profile") {
  FieldFunction u = testutil::seeded_bumps(1, 42);
  double sigma = 1.4, r = 0.5;
  KernelClass c = const_class(sigma, 1, 1.0, 2.0);
  FieldFunction ur = FieldFunction::make_analytic(
      1, [&u, r](const Point& x) { return u.eval({r * x[0], 0.0}); }, u.bound,
      r * r * *u.c11_modulus);
  Point x{0.4, 0.0};
  double lhs = pucci_plus(ur, x, c);
  double rhs = std::pow(r, sigma) * pucci_plus(u, {r * x[0], 0.0}, c);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("grid-backed fields approximate the analytic evaluation") {
  FieldFunction u = testutil::seeded_bumps(1, 9);
  int n = 257;
  double radius = 3.0;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i)
    vals[i] = u.eval({-radius + 2.0 * radius * i / (n - 1), 0.0});
  FieldFunction g = FieldFunction::make_grid(
      1, {0.0, 0.0}, radius, n, vals,
      [&u](const Point& x) { return u.eval(x); }, u.bound, u.c11_modulus);
  KernelClass c = const_class(1.0, 1);
  KernelSpec k{c, WeightKind::ConstLower, 0.0};
  Point x{0.15, 0.0};
  double va = linear_apply(u, x, k);
  double vg = linear_apply(g, x, k);
  CHECK(vg == doctest::Approx(va).epsilon(0.02));

  QuadratureConfig q;
  q.inner_split = 1.0;
  CHECK_THROWS_AS(linear_apply(g, x, k, q), InvalidGrid);
}

TEST_CASE("quadrature refinement drives the bump value to the closed form") {
  FieldFunction u = bump_1d();
  KernelClass c = const_class(1.0, 1);
  QuadratureConfig coarse;
  coarse.gl_order = 2;
  coarse.ring_factor = 4.0;
  coarse.r_min = 1e-6;
  QuadratureConfig fine = coarse;
  fine.gl_order = 4;
  fine.ring_factor = 2.0;
  double e1 = std::abs(pucci_plus(u, {0.0, 0.0}, c, coarse) + 8.0);
  double e2 = std::abs(pucci_plus(u, {0.0, 0.0}, c, fine) + 8.0);
  CHECK(e2 <= 0.5 * e1 + 1e-12);
}

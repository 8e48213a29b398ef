#include <cmath>

#include "doctest.h"
#include "rvk/kernels.hpp"

using namespace rvk;

namespace {

KernelSpec const_spec(double sigma, int dim, bool trunc = false,
                      double lam = 1.0, double Lam = 1.0,
                      WeightKind w = WeightKind::ConstLower) {
  KernelSpec k;
  k.cls.profile = {sigma, {SlowFamily::Constant, 0.0}, 0.5};
  k.cls.lambda = lam;
  k.cls.Lambda = Lam;
  k.cls.dim = dim;
  k.cls.truncated = trunc;
  k.weight = w;
  return k;
}

}  // namespace

TEST_CASE("eval_kernel: symmetry, truncation, singularity") {
  KernelSpec k = const_spec(1.0, 1);
  CHECK(eval_kernel(k, {0.3, 0.0}) ==
        doctest::Approx(eval_kernel(k, {-0.3, 0.0})).epsilon(1e-15));
  CHECK(eval_kernel(k, {0.5, 0.0}) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(eval_kernel(k, {0.0, 0.0}), DomainError);
  KernelSpec kt = const_spec(1.0, 1, true);
  CHECK(eval_kernel(kt, {1.5, 0.0}) == 0.0);
  CHECK(eval_kernel(kt, {0.5, 0.0}) == doctest::Approx(4.0));
  KernelSpec k2 = const_spec(1.0, 2);
  // (2-sigma) |y|^{-sigma} / |y|^2 at |y| = 0.5
  CHECK(eval_kernel(k2, {0.0, 0.5}) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("radial blend weight stays within [lambda, Lambda]") {
  KernelSpec k = const_spec(1.2, 1, false, 0.5, 3.0, WeightKind::RadialBlend);
  k.phase = 0.7;
  for (double s : {1e-6, 1e-2, 0.5, 1.0, 7.0, 1e4}) {
    double w = weight_at(k, s);
    CHECK(w >= 0.5 - 1e-15);
    CHECK(w <= 3.0 + 1e-15);
  }
}

TEST_CASE("levy integrability: Constant closed forms") {
  // dim 1: 2 + 2(2-sigma)/sigma
  for (double sigma : {0.5, 1.0, 1.5, 1.9}) {
    KernelSpec k = const_spec(sigma, 1);
    double expect = 2.0 + 2.0 * (2.0 - sigma) / sigma;
    CHECK(levy_integrability(k) == doctest::Approx(expect).epsilon(1e-7));
  }
  CHECK(levy_integrability(const_spec(1.0, 1)) ==
        doctest::Approx(4.0).epsilon(1e-8));
  CHECK(levy_integrability(const_spec(1.0, 1, true)) ==
        doctest::Approx(2.0).epsilon(1e-8));
  // dim 2: 2 pi (1 + (2-sigma)/sigma)
  KernelSpec k2 = const_spec(1.0, 2);
  CHECK(levy_integrability(k2) ==
        doctest::Approx(4.0 * M_PI).epsilon(1e-7));
}

TEST_CASE("levy integrability: weights bracket the blend") {
  KernelSpec lo = const_spec(1.3, 1, false, 0.5, 3.0, WeightKind::ConstLower);
  KernelSpec hi = const_spec(1.3, 1, false, 0.5, 3.0, WeightKind::ConstUpper);
  KernelSpec mid = const_spec(1.3, 1, false, 0.5, 3.0, WeightKind::RadialBlend);
  double a = levy_integrability(lo), b = levy_integrability(hi);
  double m = levy_integrability(mid);
  CHECK(a < b);
  CHECK(m >= a - 1e-9);
  CHECK(m <= b + 1e-9);
  CHECK(b == doctest::Approx(6.0 * a).epsilon(1e-9));
}

TEST_CASE("levy integrability with slowly varying factors is finite") {
  for (SlowFamily f : {SlowFamily::LogPow, SlowFamily::LogSqPow}) {
    for (double beta : {-1.0, 1.0}) {
      KernelSpec k;
      k.cls.profile = {1.5, {f, beta}, 0.5};
      double v = levy_integrability(k);
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
    }
  }
}

TEST_CASE("truncated tail mass and its scale-function bound") {
  for (double sigma : {0.5, 1.0, 1.7}) {
    KernelSpec k = const_spec(sigma, 1);
    double mass = truncation_tail_mass(k);
    CHECK(mass == doctest::Approx(2.0 * (2.0 - sigma) / sigma).epsilon(1e-7));
  }
  // mass <= S0 * (2 - sigma) * Lambda * 2 a_inf / sigma
  for (double beta : {-1.0, 1.0}) {
    KernelSpec k;
    k.cls.profile = {1.2, {SlowFamily::LogPow, beta}, 0.5};
    double mass = truncation_tail_mass(k);
    ProfileBounds b = profile_bounds(k.cls.profile);
    double cap = 2.0 * (2.0 - 1.2) * 1.0 * 2.0 * b.ainf / 1.2;
    CHECK(mass <= cap * (1.0 + 1e-9));
  }
}

TEST_CASE("translation condition: oracle agreement and domain checks") {
  KernelSpec k = const_spec(1.0, 1);
  double theta0 = 0.5, h = 0.2;
  double val = translation_condition(k, theta0, {h, 0.0}, 1e-8);

  // independent reference: Simpson on both rays, generous fixed range
  auto f = [&](double y) {
    double a = std::pow(std::abs(y), -2.0);
    double b = std::pow(std::abs(y - h), -2.0);
    return std::abs(a - b) / std::abs(y);
  };
  auto simpson = [&](double a, double b, int n) {
    double hh = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * hh);
    return s * hh / 3.0;
  };
  double ref = 0.0;
  for (double lo = theta0; lo < 4e6; lo *= 2.0)
    ref += simpson(lo, 2.0 * lo, 512) + simpson(-2.0 * lo, -lo, 512);
  CHECK(val == doctest::Approx(ref).epsilon(1e-5));

  CHECK_THROWS_AS(translation_condition(k, 0.5, {0.3, 0.0}), DomainError);
  CHECK_THROWS_AS(translation_condition(k, -1.0, {0.0, 0.0}), DomainError);

  // truncated kernels keep the condition finite as well
  KernelSpec kt = const_spec(1.0, 1, true);
  double vt = translation_condition(kt, theta0, {h, 0.0});
  CHECK(std::isfinite(vt));
  CHECK(vt > 0.0);

  // dim 2 smoke: finite, positive, shrinks with |h|
  KernelSpec k2 = const_spec(1.0, 2);
  double v1 = translation_condition(k2, 0.5, {0.2, 0.0}, 1e-4);
  double v2 = translation_condition(k2, 0.5, {0.05, 0.0}, 1e-4);
  CHECK(std::isfinite(v1));
  CHECK(v2 < v1);
}

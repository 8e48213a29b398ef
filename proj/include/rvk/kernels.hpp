#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "rvk/errors.hpp"
#include "rvk/quadrature.hpp"
#include "rvk/regvar.hpp"

namespace rvk {

using Point = std::array<double, 2>;

inline double norm2(const Point& p, int dim) {
  return dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

// Surface measure of the unit sphere: 2 points in 1d, circle in 2d.
inline double sphere_measure(int dim) {
  if (dim == 1) return 2.0;
  if (dim == 2) return 2.0 * M_PI;
  throw InvalidProfile("only dimensions 1 and 2 are supported");
}

// int_{S^{n-1}} y_1^2 dS
inline double sphere_second_moment(int dim) {
  if (dim == 1) return 2.0;
  if (dim == 2) return M_PI;
  throw InvalidProfile("only dimensions 1 and 2 are supported");
}

enum class WeightKind { ConstLower, ConstUpper, RadialBlend };

struct KernelClass {
  KernelProfile profile;
  double lambda = 1.0;
  double Lambda = 1.0;
  int dim = 1;
  bool truncated = false;  // support restricted to B_1
};

inline void validate(const KernelClass& c) {
  validate(c.profile);
  if (!(c.lambda > 0.0) || !(c.Lambda >= c.lambda))
    throw InvalidProfile("need 0 < lambda <= Lambda");
  if (c.dim != 1 && c.dim != 2)
    throw InvalidProfile("only dimensions 1 and 2 are supported");
}

struct KernelSpec {
  KernelClass cls;
  WeightKind weight = WeightKind::ConstLower;
  double phase = 0.0;  // RadialBlend oscillation phase
};

inline double weight_at_log(const KernelSpec& k, double log_s) {
  switch (k.weight) {
    case WeightKind::ConstLower:
      return k.cls.lambda;
    case WeightKind::ConstUpper:
      return k.cls.Lambda;
    case WeightKind::RadialBlend:
      return k.cls.lambda +
             (k.cls.Lambda - k.cls.lambda) *
                 (1.0 + std::cos(k.phase + k.cls.dim * log_s)) / 2.0;
  }
  throw InvalidProfile("unknown weight kind");
}

inline double weight_at(const KernelSpec& k, double s) {
  return weight_at_log(k, std::log(s));
}

// K(y) = (2 - sigma) w(|y|) l(|y|) / |y|^n, zero outside B_1 when truncated.
inline double eval_kernel(const KernelSpec& k, const Point& y) {
  validate(k.cls);
  double s = norm2(y, k.cls.dim);
  if (!(s > 0.0)) throw DomainError("kernel is singular at the origin");
  if (k.cls.truncated && s > 1.0) return 0.0;
  const KernelProfile& p = k.cls.profile;
  return (2.0 - p.sigma) * weight_at(k, s) * eval_l(p, s) /
         std::pow(s, k.cls.dim);
}

// Potter constants for the profile near zero and near infinity, with delta
// at half the admissible window.  Cached per profile.
struct ProfileBounds {
  double a0 = 1.0;
  double ainf = 1.0;
  double delta = 0.0;
};

inline ProfileBounds profile_bounds(const KernelProfile& p) {
  using Key = std::tuple<int, double, double, double>;
  static std::map<Key, ProfileBounds> cache;
  static std::mutex mu;
  Key key{(int)p.l0.family, p.l0.beta, p.sigma, p.sigma0};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  ProfileBounds b;
  b.delta = 0.5 * potter_delta_window(p);
  b.a0 = potter_constants(p, b.delta, {1e-10, 1.0}, 60).a;
  b.ainf = potter_constants(p, b.delta, {1.0, 1e6}, 60).a;
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = b;
  return b;
}

// Certified bound on int_0^eps s l(s) ds from the Potter estimate.
inline double inner_moment_bound(const KernelProfile& p,
                                 const ProfileBounds& b, double eps) {
  return b.a0 * eval_l(p, eps) * eps * eps / (2.0 - p.sigma - b.delta);
}

// Certified bound on int_S^inf l(s) / s^{1+q} ds, q >= 0.
inline double tail_moment_bound(const KernelProfile& p,
                                const ProfileBounds& b, double S, double q) {
  double expnt = p.sigma + q - b.delta;
  if (!(expnt > 0.0)) throw TailDivergence("tail exponent not positive");
  return b.ainf * eval_l(p, S) * std::pow(S, -q) / expnt;
}

// int_{R^n} min(1, |y|^2) K(y) dy with an upper weight bound Lambda used for
// the certified remainders near zero and at infinity.
inline double levy_integrability(const KernelSpec& k, double rel_tol = 1e-8) {
  validate(k.cls);
  const KernelProfile& p = k.cls.profile;
  const ProfileBounds b = profile_bounds(p);
  const double S0 = sphere_measure(k.cls.dim);
  const double two_ms = 2.0 - p.sigma;
  auto inner_f = [&](double s) { return s * eval_l(p, s) * weight_at(k, s); };
  auto outer_f = [&](double s) { return eval_l(p, s) * weight_at(k, s) / s; };

  double eps = 1e-6;
  double inner = S0 * two_ms * integrate_rings(inner_f, eps, 1.0, rel_tol);
  double rem = S0 * two_ms * k.cls.Lambda * inner_moment_bound(p, b, eps);
  while (rem > 0.5 * rel_tol * inner && eps > 1e-300) {
    double eps2 = eps * 1e-3;
    inner += S0 * two_ms * integrate_rings(inner_f, eps2, eps, rel_tol);
    eps = eps2;
    rem = S0 * two_ms * k.cls.Lambda * inner_moment_bound(p, b, eps);
  }
  inner += 0.0;  // remainder certified below tolerance, dropped

  if (k.cls.truncated) return inner;

  double S = 16.0;
  double outer = S0 * two_ms * integrate_rings(outer_f, 1.0, S, rel_tol);
  double tail = S0 * two_ms * k.cls.Lambda * tail_moment_bound(p, b, S, 0.0);
  while (tail > 0.5 * rel_tol * (inner + outer)) {
    if (S > 1e50) throw TailDivergence("levy tail does not certify");
    double S2 = S * 1e3;
    outer += S0 * two_ms * integrate_rings(outer_f, S, S2, rel_tol);
    S = S2;
    tail = S0 * two_ms * k.cls.Lambda * tail_moment_bound(p, b, S, 0.0);
  }
  return inner + outer;
}

// int_{R^n \ B_theta0} |K(y) - K(y - h)| / |y| dy  for |h| < theta0 / 2.
inline double translation_condition(const KernelSpec& k, double theta0,
                                    const Point& h, double rel_tol = 1e-6) {
  validate(k.cls);
  const int dim = k.cls.dim;
  if (!(theta0 > 0.0)) throw DomainError("theta0 must be positive");
  if (!(norm2(h, dim) < 0.5 * theta0))
    throw DomainError("need |h| < theta0 / 2");
  const KernelProfile& p = k.cls.profile;
  const ProfileBounds b = profile_bounds(p);

  auto kern = [&](const Point& y) { return eval_kernel(k, y); };
  auto integrand_1d = [&](double y) {
    Point a{y, 0.0}, c{y - h[0], 0.0};
    return std::abs(kern(a) - kern(c)) / std::abs(y);
  };
  auto ring_1d = [&](double lo, double hi, int sign) {
    auto f = [&](double s) { return integrand_1d(sign * s); };
    return integrate_rings(f, lo, hi, rel_tol, 2.0, 16);
  };
  auto angular_2d = [&](double s) {
    const int m = 64;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      double th = 2.0 * M_PI * (j + 0.5) / m;
      Point y{s * std::cos(th), s * std::sin(th)};
      Point yh{y[0] - h[0], y[1] - h[1]};
      acc += std::abs(kern(y) - kern(yh));
    }
    return acc * (2.0 * M_PI / m);  // integrand carries 1/|y| * |y| ds
  };

  double S = std::max(4.0, 4.0 * theta0);
  double total = 0.0;
  // explicit breakpoints at the truncation edge for both kernels
  std::vector<double> brk{theta0, 1.0 - std::abs(h[0]), 1.0,
                          1.0 + std::abs(h[0]), S};
  std::sort(brk.begin(), brk.end());
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    double lo = std::max(brk[i], theta0), hi = brk[i + 1];
    if (!(hi > lo)) continue;
    if (dim == 1) {
      total += ring_1d(lo, hi, +1) + ring_1d(lo, hi, -1);
    } else {
      total += integrate_rings(angular_2d, lo, hi, rel_tol, 2.0, 12);
    }
  }
  if (k.cls.truncated) return total;

  // tail: |K(y)| + |K(y-h)| against Potter bounds
  const double S0m = sphere_measure(dim);
  const double two_ms = 2.0 - p.sigma;
  double tail = 2.0 * S0m * two_ms * k.cls.Lambda *
                tail_moment_bound(p, b, 0.5 * S, 1.0);
  while (tail > 0.5 * rel_tol * std::max(total, 1e-300)) {
    if (S > 1e50) throw TailDivergence("translation tail does not certify");
    double S2 = S * 64.0;
    if (dim == 1)
      total += ring_1d(S, S2, +1) + ring_1d(S, S2, -1);
    else
      total += integrate_rings(angular_2d, S, S2, rel_tol, 2.0, 12);
    S = S2;
    tail = 2.0 * S0m * two_ms * k.cls.Lambda *
           tail_moment_bound(p, b, 0.5 * S, 1.0);
  }
  return total;
}

// Mass of the discarded tail of a truncated kernel, kappa = int_{|y|>1} K.
inline double truncation_tail_mass(const KernelSpec& k, double rel_tol = 1e-8) {
  validate(k.cls);
  const KernelProfile& p = k.cls.profile;
  const ProfileBounds b = profile_bounds(p);
  const double S0 = sphere_measure(k.cls.dim);
  const double two_ms = 2.0 - p.sigma;
  auto f = [&](double s) { return eval_l(p, s) * weight_at(k, s) / s; };
  double S = 16.0, total = S0 * two_ms * integrate_rings(f, 1.0, S, rel_tol);
  double tail = S0 * two_ms * k.cls.Lambda * tail_moment_bound(p, b, S, 0.0);
  while (tail > 0.5 * rel_tol * total) {
    if (S > 1e50) throw TailDivergence("kernel tail does not certify");
    double S2 = S * 1e3;
    total += S0 * two_ms * integrate_rings(f, S, S2, rel_tol);
    S = S2;
    tail = S0 * two_ms * k.cls.Lambda * tail_moment_bound(p, b, S, 0.0);
  }
  return total;
}

}  // namespace rvk

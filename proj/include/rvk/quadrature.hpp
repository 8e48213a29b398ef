#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "rvk/errors.hpp"

namespace rvk {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline GaussRule make_gauss_rule(int n) {
  if (n < 1) throw InvalidGrid("gauss rule order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

inline const GaussRule& gauss_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
  return it->second;
}

template <class F>
double gauss_integrate(const F& f, double a, double b, int order) {
  const GaussRule& r = gauss_rule(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k)
    s += r.weights[k] * f(mid + half * r.nodes[k]);
  return half * s;
}

// Adaptive bisection with an order-(2m) vs order-m error estimate.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol,
                          double abs_floor = 0.0, int order = 12,
                          int max_depth = 40) {
  struct Rec {
    const F& f;
    double rel_tol, abs_floor;
    int order, max_depth;
    double run(double lo, double hi, double coarse, int depth) const {
      double m = 0.5 * (lo + hi);
      double left = gauss_integrate(f, lo, m, order);
      double right = gauss_integrate(f, m, hi, order);
      double fine = left + right;
      double err = std::abs(fine - coarse);
      double scale = std::max(std::abs(fine), abs_floor);
      if (err <= rel_tol * scale || depth >= max_depth) {
        if (depth >= max_depth && err > 1e3 * rel_tol * scale)
          throw QuadratureFailure("adaptive quadrature failed to converge");
        return fine;
      }
      return run(lo, m, left, depth + 1) + run(m, hi, right, depth + 1);
    }
  };
  Rec rec{f, rel_tol, abs_floor, order, max_depth};
  double coarse = gauss_integrate(f, a, b, order);
  return rec.run(a, b, coarse, 0);
}

// Integral over [r_lo, r_hi] split into geometric rings [s, factor*s].
// Each ring is handled by adaptive Gauss quadrature; suited to integrands
// with power-law behaviour near zero.
template <class F>
double integrate_rings(const F& f, double r_lo, double r_hi, double rel_tol,
                       double ring_factor = 2.0, int order = 12) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    throw InvalidGrid("integrate_rings needs 0 < r_lo < r_hi");
  if (!(ring_factor > 1.0)) throw InvalidGrid("ring factor must exceed 1");
  double total = 0.0;
  double lo = r_lo;
  while (lo < r_hi) {
    double hi = std::min(lo * ring_factor, r_hi);
    total += integrate_adaptive(f, lo, hi, rel_tol, 0.0, order);
    lo = hi;
  }
  return total;
}

}  // namespace rvk

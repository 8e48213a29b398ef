#pragma once

#include <algorithm>
#include <cmath>

#include "rvk/errors.hpp"
#include "rvk/field.hpp"
#include "rvk/kernels.hpp"
#include "rvk/nonlocal_ops.hpp"
#include "rvk/regvar.hpp"

namespace rvk {

// Smallest integer p > n such that
//   (p+2) (lambda/2) S2(n) - Lambda S0(n) > 0,
// where S2(n) is the second moment of the unit sphere and S0(n) its measure.
// This margin is what makes the power barrier a subsolution away from its
// plateau.
inline int choose_p(int dim, double lambda, double Lambda) {
  if (!(lambda > 0.0) || lambda > Lambda)
    throw InvalidProfile("choose_p needs 0 < lambda <= Lambda");
  const double S2 = sphere_second_moment(dim);
  const double S0 = sphere_measure(dim);
  int p = dim + 1;
  while (!((p + 2) * 0.5 * lambda * S2 - Lambda * S0 > 0.0)) ++p;
  return p;
}

// phi(x) = min((kappa0 R)^{-p}, |x|^{-p}): a bounded power-decay barrier
// whose plateau radius kappa0 R = eps0 kappa1 R is tuned (via eps0) so that
// M^- phi >= 0 on the annulus kappa1 R <= |x| <= R.
struct PowerBarrierSpec {
  KernelClass cls;
  double R = 0.4;
  double kappa1 = 0.1;
  double eps0 = 1.0 / 16.0;
  int p = 2;

  double kappa0() const { return eps0 * kappa1; }
};

inline void validate(const PowerBarrierSpec& s) {
  validate(s.cls);
  if (!(s.R > 0.0 && s.R < 1.0)) throw DomainError("R must lie in (0,1)");
  if (!(s.kappa1 > 0.0 && s.kappa1 < 1.0))
    throw DomainError("kappa1 must lie in (0,1)");
  if (!(s.kappa0() > 0.0 && s.kappa0() < s.kappa1 / 8.0))
    throw DomainError("kappa0 must lie in (0, kappa1/8)");
  if (s.p <= s.cls.dim) throw DomainError("p must exceed the dimension");
}

inline double eval_power_barrier(const PowerBarrierSpec& s, const Point& x) {
  const double r = std::max(norm2(x, 2), s.kappa0() * s.R);
  return std::pow(r, -(double)s.p);
}

inline FieldFunction power_barrier_field(const PowerBarrierSpec& s) {
  validate(s);
  const double k0R = s.kappa0() * s.R;
  const double bound = std::pow(k0R, -(double)s.p);
  const double c11 = s.p * (s.p + 1.0) * std::pow(k0R, -(double)s.p - 2.0);
  return FieldFunction::make_analytic(
      s.cls.dim, [s](const Point& x) { return eval_power_barrier(s, x); },
      bound, c11);
}

// Phi: a C^{1,1} bump supported in B_R, equal to a scaled power tail
// c0 kappa0^p ((R/|x|)^p - 1) outside the glue radius kappa0 R and to the
// quadratic cap c0 (-a|x|^2 + b) inside it; c0 normalizes Phi = 2 at
// |x| = delta2 R so that Phi >= 2 on B_{delta2 R}.
struct CompositeBarrierSpec {
  double R = 0.4;
  double kappa0 = 0.1 / 16.0;
  int p = 2;
  double delta1 = 1.0 / 32.0;
  double delta2 = 0.5;
};

inline double composite_a(const CompositeBarrierSpec& s) {
  return 0.5 * s.p / ((s.kappa0 * s.R) * (s.kappa0 * s.R));
}

inline double composite_b(const CompositeBarrierSpec& s) {
  return 1.0 - std::pow(s.kappa0, (double)s.p) + 0.5 * s.p;
}

inline double composite_c0(const CompositeBarrierSpec& s) {
  return 2.0 / (std::pow(s.kappa0, (double)s.p) *
                (std::pow(s.delta2, -(double)s.p) - 1.0));
}

inline void validate(const CompositeBarrierSpec& s) {
  if (!(s.R > 0.0 && s.R < 1.0)) throw DomainError("R must lie in (0,1)");
  if (!(s.kappa0 > 0.0 && s.kappa0 < 1.0))
    throw DomainError("kappa0 must lie in (0,1)");
  if (!(s.delta1 > 0.0 && s.delta1 < s.delta2 && s.delta2 < 1.0))
    throw DomainError("need 0 < delta1 < delta2 < 1");
  if (s.p <= 0) throw DomainError("p must be positive");
}

inline double eval_composite_barrier(const CompositeBarrierSpec& s,
                                     const Point& x) {
  const double r = norm2(x, 2);
  if (r >= s.R) return 0.0;
  const double c0 = composite_c0(s);
  if (r <= s.kappa0 * s.R)
    return c0 * (-composite_a(s) * r * r + composite_b(s));
  return c0 * std::pow(s.kappa0, (double)s.p) *
         (std::pow(s.R / r, (double)s.p) - 1.0);
}

inline FieldFunction composite_barrier_field(const CompositeBarrierSpec& s,
                                             const KernelClass& cls) {
  validate(s);
  const double bound = composite_c0(s) * composite_b(s);
  // the largest second derivative sits at the glue radius
  const double c11 = composite_c0(s) * s.p * (s.p + 1.0) /
                     ((s.kappa0 * s.R) * (s.kappa0 * s.R));
  return FieldFunction::make_analytic(
      cls.dim, [s](const Point& x) { return eval_composite_barrier(s, x); },
      bound, c11);
}

// delta_R = (2-sigma) lambda int_{B_R} |y|^2/(2R^2) l(|y|)/|y|^n dy, the
// strictly positive value of M^- of the comparison bump min(1, |x|^2/4R^2)
// restricted to B_R.  Closed form lambda S0(n)/2 R^{-sigma} for the constant
// profile; log-radius quadrature otherwise.
inline double comparison_delta_R(const KernelClass& cls, double R,
                                 const QuadratureConfig& q = {}) {
  validate(cls);
  if (!(R > 0.0 && R <= 1.0)) throw DomainError("R must lie in (0,1]");
  const KernelProfile& p = cls.profile;
  const double S0 = sphere_measure(cls.dim);
  if (p.l0.family == SlowFamily::Constant)
    return cls.lambda * 0.5 * S0 * std::pow(R, -p.sigma);
  // int_0^R r^{1-sigma} l0(r)^{2-sigma} dr in log radius, descending panels
  const double two_ms = 2.0 - p.sigma;
  const GaussRule& gr = gauss_rule(std::max(q.gl_order, 16));
  const int panels = 24;
  const double depth = q.taylor_depth / two_ms;
  const double pw = depth / panels;
  double acc = 0.0;
  for (int pl = 0; pl < panels; ++pl) {
    double hi = std::log(R) - pw * pl, lo = hi - pw;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < gr.nodes.size(); ++k) {
      double t = mid + half * gr.nodes[k];
      acc += gr.weights[k] * half * std::exp(two_ms * t) *
             std::pow(eval_l0_log(p.l0, t), two_ms);
    }
  }
  return two_ms * cls.lambda * S0 / (2.0 * R * R) * acc;
}

// Radial check region: r_in = 0 gives a punctured ball (the radii sampled
// are strictly interior midpoints either way).
struct Annulus {
  double r_in = 0.0;
  double r_out = 1.0;
};

struct SubsolutionReport {
  double min_value = 0.0;
  Point witness{0.0, 0.0};
  double threshold = 0.0;
  bool passes = false;
};

// Evaluate M^- of the barrier field at midpoint radii times a direction set
// (a point pair in 1d, equispaced angles in 2d) and report the minimum.
inline SubsolutionReport verify_subsolution(const FieldFunction& phi,
                                            const Annulus& reg,
                                            const KernelClass& cls,
                                            const QuadratureConfig& q = {},
                                            int radial_points = 64,
                                            double threshold = 0.0) {
  if (!(reg.r_in >= 0.0 && reg.r_in < reg.r_out))
    throw DomainError("annulus needs 0 <= r_in < r_out");
  if (radial_points < 1) throw DomainError("need at least one radius");
  SubsolutionReport rep;
  rep.threshold = threshold;
  bool first = true;
  const int n_dir = cls.dim == 1 ? 2 : q.angular_order;
  for (int i = 0; i < radial_points; ++i) {
    double r = reg.r_in + (reg.r_out - reg.r_in) * (i + 0.5) / radial_points;
    for (int j = 0; j < n_dir; ++j) {
      Point x;
      if (cls.dim == 1) {
        x = {j == 0 ? r : -r, 0.0};
      } else {
        double th = 2.0 * M_PI * (j + 0.5) / n_dir;
        x = {r * std::cos(th), r * std::sin(th)};
      }
      double v = pucci_minus(phi, x, cls, q);
      if (first || v < rep.min_value) {
        rep.min_value = v;
        rep.witness = x;
      }
      first = false;
    }
  }
  rep.passes = rep.min_value >= threshold;
  return rep;
}

// Bisection for the plateau factor: start at 1/16 and halve eps0 until the
// subsolution certificate clears -tol on the annulus (the barrier only gets
// easier as the plateau shrinks).
inline double find_epsilon0(PowerBarrierSpec s, const QuadratureConfig& q = {},
                            double tol = 1e-6, int max_halvings = 20) {
  s.eps0 = 1.0 / 16.0;
  for (int it = 0; it < max_halvings; ++it) {
    SubsolutionReport rep = verify_subsolution(
        power_barrier_field(s), Annulus{s.kappa1 * s.R, s.R}, s.cls, q, 64,
        -tol);
    if (rep.passes) return s.eps0;
    s.eps0 *= 0.5;
  }
  throw NotConverged("no eps0 certified the power barrier");
}

}  // namespace rvk

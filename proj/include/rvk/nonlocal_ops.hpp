#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rvk/errors.hpp"
#include "rvk/field.hpp"
#include "rvk/kernels.hpp"
#include "rvk/quadrature.hpp"
#include "rvk/regvar.hpp"

namespace rvk {

struct QuadratureConfig {
  double inner_split = 4.0;   // grid fields: inner cutoff in units of h
  double inner_radius = 0.0;  // absolute inner cutoff override
  double r_min = 1e-8;        // analytic fields: floor for the inner cutoff
  double noise_budget = 1e3;  // cap on the direct-zone kernel mass
  double ring_factor = 2.0;   // geometric ring growth
  int gl_order = 12;          // Gauss nodes per ring
  int angular_order = 32;     // angular nodes (dim 2)
  double rel_tol = 1e-7;      // target for certified remainders
  double s_max = 1e20;        // hard outer limit for the tail rings
  double taylor_depth = 45.0; // log-radius depth of the inner Taylor zone
};

struct OpResult {
  double value = 0.0;
  double error_bound = 0.0;  // certified inner + tail remainder
};

// Discrete C^{1,1} modulus of a grid field from axis second differences.
inline double discrete_c11(const FieldFunction& u) {
  if (u.analytic) throw InvalidGrid("discrete_c11 needs a grid field");
  const double hh = u.h();
  double m = 0.0;
  if (u.dim == 1) {
    for (int i = 1; i + 1 < u.n_side; ++i)
      m = std::max(m, std::abs(u.grid_value(i + 1) + u.grid_value(i - 1) -
                               2.0 * u.grid_value(i)));
  } else {
    for (int j = 0; j < u.n_side; ++j)
      for (int i = 1; i + 1 < u.n_side; ++i) {
        m = std::max(m, std::abs(u.grid_value(i + 1, j) +
                                 u.grid_value(i - 1, j) -
                                 2.0 * u.grid_value(i, j)));
        m = std::max(m, std::abs(u.grid_value(j, i + 1) +
                                 u.grid_value(j, i - 1) -
                                 2.0 * u.grid_value(j, i)));
      }
  }
  return m / (2.0 * hh * hh);
}

// Shared quadrature nodes for all operators of one class: radial rings with
// Gauss nodes (times midpoint angles in 2d).  Node weights w are nonnegative
// and carry every factor except the kernel weight omega; mu holds the
// symmetric second difference at the node.
//
// Below the inner cutoff the raw second difference is dominated by rounding
// noise while (for sigma near 2) most of the operator mass sits there, so
// that zone uses the Taylor surrogate mu ~ q s^2 with the directional
// curvature q measured once at the cutoff scale.  Those nodes fold the s^2
// into the weight and are integrated in log radius, which stays accurate
// however small the effective radii get.
struct NodeSet {
  std::vector<double> log_s, w, mu;
  double inner_err_coeff = 0.0;  // multiply by sup omega
  double tail_err_coeff = 0.0;
  double u_at_x = 0.0;
};

// Grid-field inner cutoff: sqrt(h) balances the curvature-surrogate error
// of the inner zone (r_lo^{4-sigma}) against the interpolation error of the
// direct rings (h^2 r_lo^{-sigma}), giving overall order 2 - sigma/2 >= 1
// uniformly in sigma; the inner_split floor keeps the finite-difference
// scale well separated from the first ring on coarse grids.
inline double grid_inner_cutoff(double h, const QuadratureConfig& q) {
  return std::max({q.inner_split * h, std::sqrt(h), q.inner_radius});
}

inline NodeSet build_nodes(const FieldFunction& u, const Point& x,
                           const KernelClass& cls,
                           const QuadratureConfig& q) {
  validate(cls);
  if (u.dim != cls.dim) throw InvalidProfile("field/kernel dimension mismatch");
  const KernelProfile& p = cls.profile;
  const ProfileBounds pb = profile_bounds(p);
  const int dim = cls.dim;
  const double S0 = sphere_measure(dim);
  const double two_ms = 2.0 - p.sigma;
  const GaussRule& gr = gauss_rule(q.gl_order);

  NodeSet ns;
  ns.u_at_x = u.eval(x);

  // Inner cutoff: for analytic fields pick it so that the kernel mass of
  // the direct-evaluation zone, (2-sigma)/sigma * l(r_lo), stays below the
  // noise budget; rounding noise in the raw second differences is amplified
  // by exactly that mass.
  double r_lo, r_fd;
  if (u.analytic) {
    double lo = std::log(std::min(q.r_min, 0.05)), hi = std::log(0.05);
    double target = q.noise_budget * p.sigma / two_ms;
    auto mass = [&](double t) {
      return std::exp(-p.sigma * t) *
             std::pow(eval_l0_log(p.l0, t), two_ms);
    };
    if (mass(lo) <= target) {
      r_lo = std::exp(lo);
    } else {
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (mass(mid) > target ? lo : hi) = mid;
      }
      r_lo = std::exp(0.5 * (lo + hi));
    }
    r_lo = std::max(r_lo, q.inner_radius);
    r_fd = r_lo;
  } else {
    if (q.inner_split < 2.0)
      throw InvalidGrid("inner split must be at least 2 grid spacings");
    r_lo = grid_inner_cutoff(u.h(), q);
    r_fd = u.h();
  }

  // Inner Taylor zone on (0, r_lo], integrated in log radius.  The node mu
  // carries the surrogate q + q4 s^2 (the factor s^2 lives in the weight);
  // for analytic fields q and q4 are fitted from second differences at two
  // scales so the surrogate error is O(s^6).
  {
    const double tau_in = std::log(r_lo);
    const double depth = q.taylor_depth / two_ms;
    const int panels = 12;
    const double pw = depth / panels;
    const GaussRule& gt = gauss_rule(std::max(q.gl_order, 16));
    auto zone_w = [&](double tau) {
      // (2-sigma) e^{(2-sigma) tau} l0(e^tau)^{2-sigma}
      return two_ms * std::exp(two_ms * tau) *
             std::pow(eval_l0_log(p.l0, tau), two_ms);
    };
    auto add_dir = [&](double cth, double sth, double ang_w) {
      double qdir, q4dir;
      if (u.analytic) {
        double m1 = second_difference(u, x, {r_fd * cth, r_fd * sth});
        double m2 = second_difference(
            u, x, {0.5 * r_fd * cth, 0.5 * r_fd * sth});
        q4dir = (4.0 / 3.0) * (m1 - 4.0 * m2) / (r_fd * r_fd * r_fd * r_fd);
        qdir = (16.0 * m2 - m1) / (3.0 * r_fd * r_fd);
      } else {
        qdir = second_difference(u, x, {r_fd * cth, r_fd * sth}) /
               (r_fd * r_fd);
        q4dir = 0.0;
      }
      for (int pl = 0; pl < panels; ++pl) {
        double hi = tau_in - pw * pl, lo = hi - pw;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t k = 0; k < gt.nodes.size(); ++k) {
          double tau = mid + half * gt.nodes[k];
          double s2 = std::exp(2.0 * tau);  // underflow to 0 is harmless
          ns.log_s.push_back(tau);
          ns.w.push_back(gt.weights[k] * half * zone_w(tau) * ang_w);
          ns.mu.push_back(qdir + q4dir * s2);
        }
      }
    };
    if (dim == 1) {
      add_dir(1.0, 0.0, 2.0);
    } else {
      const int m = q.angular_order;
      for (int j = 0; j < m; ++j) {
        double th = M_PI * (j + 0.5) / m;
        add_dir(std::cos(th), std::sin(th), 2.0 * M_PI / m);
      }
    }
    // truncated Taylor tail below the covered depth
    ns.inner_err_coeff = S0 * 4.0 * pb.a0 *
                         std::pow(eval_l0_log(p.l0, tau_in - depth), two_ms) *
                         std::exp(two_ms * (tau_in - depth)) *
                         (std::abs(ns.u_at_x) + u.sup_bound()) /
                         std::max(r_fd * r_fd, 1e-300);
  }

  auto add_ring = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < gr.nodes.size(); ++k) {
      double s = mid + half * gr.nodes[k];
      double base = gr.weights[k] * half * two_ms * eval_l(p, s) / s;
      if (dim == 1) {
        ns.log_s.push_back(std::log(s));
        ns.w.push_back(2.0 * base);
        ns.mu.push_back(second_difference(u, x, {s, 0.0}));
      } else {
        const int m = q.angular_order;
        for (int j = 0; j < m; ++j) {
          double th = M_PI * (j + 0.5) / m;
          Point y{s * std::cos(th), s * std::sin(th)};
          ns.log_s.push_back(std::log(s));
          ns.w.push_back(base * 2.0 * M_PI / m);
          ns.mu.push_back(second_difference(u, x, y));
        }
      }
    }
  };

  // rings up to the truncation edge / unit radius (edge exactly at 1)
  double edge = 1.0;
  double lo = r_lo;
  while (lo < edge) {
    double hi = std::min(lo * q.ring_factor, edge);
    add_ring(lo, hi);
    lo = hi;
  }
  if (cls.truncated) return ns;

  // outer rings until the certified tail remainder is small
  double reach = 4.0;  // beyond here the far rule alone cannot certify less
  if (!u.analytic) {
    double dx = std::abs(x[0] - u.center[0]) +
                (dim == 2 ? std::abs(x[1] - u.center[1]) : 0.0);
    reach = std::max(reach, 2.0 * (dx + u.radius * std::sqrt((double)dim)));
  }
  double mu_cap = 2.0 * (u.sup_bound() + std::abs(ns.u_at_x));
  double S = edge;
  while (true) {
    double hi = S * q.ring_factor;
    add_ring(S, hi);
    S = hi;
    if (S < reach) continue;
    double B = mu_cap;
    if (!u.analytic && u.far_constant)
      B = std::abs(2.0 * (u.scale * *u.far_constant - ns.u_at_x));
    double tail = S0 * two_ms * B * tail_moment_bound(p, pb, S, 0.0);
    double wmass = 0.0;
    for (std::size_t k = 0; k < ns.w.size(); ++k)
      wmass += ns.w[k] * std::abs(ns.mu[k]);
    if (tail <= q.rel_tol * std::max(wmass, 1e-300) || B == 0.0) {
      ns.tail_err_coeff = tail;
      break;
    }
    if (S > q.s_max)
      throw QuadratureFailure("tail remainder did not certify below s_max");
  }
  return ns;
}

namespace detail {

template <class Comb>
OpResult combine_nodes(const NodeSet& ns, double omega_sup, Comb comb) {
  double acc = 0.0;
  for (std::size_t k = 0; k < ns.log_s.size(); ++k)
    acc += ns.w[k] * comb(ns.log_s[k], ns.mu[k]);
  OpResult r;
  r.value = acc;
  r.error_bound = omega_sup * (ns.inner_err_coeff + ns.tail_err_coeff);
  return r;
}

}  // namespace detail

// L u(x) = int (u(x+y)+u(x-y)-2u(x)) K(y) dy for one kernel of the class.
inline OpResult linear_apply_result(const FieldFunction& u, const Point& x,
                                    const KernelSpec& k,
                                    const QuadratureConfig& q = {}) {
  NodeSet ns = build_nodes(u, x, k.cls, q);
  return detail::combine_nodes(
      ns, k.cls.Lambda, [&](double ls, double mu) { return weight_at_log(k, ls) * mu; });
}

inline double linear_apply(const FieldFunction& u, const Point& x,
                           const KernelSpec& k,
                           const QuadratureConfig& q = {}) {
  return linear_apply_result(u, x, k, q).value;
}

// Extremal operators in closed form over the class:
//   M^+ u = (2-sigma) int (Lambda mu^+ - lambda mu^-) l(|y|)/|y|^n dy
//   M^- u = (2-sigma) int (lambda mu^+ - Lambda mu^-) l(|y|)/|y|^n dy
inline OpResult pucci_plus_result(const FieldFunction& u, const Point& x,
                                  const KernelClass& cls,
                                  const QuadratureConfig& q = {}) {
  NodeSet ns = build_nodes(u, x, cls, q);
  return detail::combine_nodes(ns, cls.Lambda, [&](double, double mu) {
    return mu > 0.0 ? cls.Lambda * mu : cls.lambda * mu;
  });
}

inline OpResult pucci_minus_result(const FieldFunction& u, const Point& x,
                                   const KernelClass& cls,
                                   const QuadratureConfig& q = {}) {
  NodeSet ns = build_nodes(u, x, cls, q);
  return detail::combine_nodes(ns, cls.Lambda, [&](double, double mu) {
    return mu > 0.0 ? cls.lambda * mu : cls.Lambda * mu;
  });
}

inline double pucci_plus(const FieldFunction& u, const Point& x,
                         const KernelClass& cls,
                         const QuadratureConfig& q = {}) {
  return pucci_plus_result(u, x, cls, q).value;
}

inline double pucci_minus(const FieldFunction& u, const Point& x,
                          const KernelClass& cls,
                          const QuadratureConfig& q = {}) {
  return pucci_minus_result(u, x, cls, q).value;
}

inline double pucci_truncated(const FieldFunction& u, const Point& x,
                              KernelClass cls, bool plus,
                              const QuadratureConfig& q = {}) {
  cls.truncated = true;
  return plus ? pucci_plus(u, x, cls, q) : pucci_minus(u, x, cls, q);
}

// Inf over groups of sup within each group, all kernels sharing one class
// geometry and evaluated on one shared node set.
struct OperatorFamily {
  std::vector<std::vector<KernelSpec>> groups;
};

inline double infsup_apply(const FieldFunction& u, const Point& x,
                           const OperatorFamily& fam,
                           const QuadratureConfig& q = {}) {
  if (fam.groups.empty()) throw EmptyFamily("inf-sup family has no groups");
  const KernelClass& cls0 = fam.groups.front().empty()
                                ? throw EmptyFamily("empty group")
                                : fam.groups.front().front().cls;
  for (const auto& g : fam.groups) {
    if (g.empty()) throw EmptyFamily("inf-sup family has an empty group");
    for (const auto& k : g) {
      if (k.cls.dim != cls0.dim || k.cls.truncated != cls0.truncated ||
          k.cls.profile.sigma != cls0.profile.sigma ||
          (int)k.cls.profile.l0.family != (int)cls0.profile.l0.family ||
          k.cls.profile.l0.beta != cls0.profile.l0.beta)
        throw InvalidProfile("inf-sup family members must share one class");
    }
  }
  NodeSet ns = build_nodes(u, x, cls0, q);
  double inf = 0.0;
  bool first_g = true;
  for (const auto& g : fam.groups) {
    double sup = 0.0;
    bool first_k = true;
    for (const auto& k : g) {
      double v = detail::combine_nodes(ns, k.cls.Lambda,
                                       [&](double ls, double mu) {
                                         return weight_at_log(k, ls) * mu;
                                       })
                     .value;
      if (first_k || v > sup) sup = v;
      first_k = false;
    }
    if (first_g || sup < inf) inf = sup;
    first_g = false;
  }
  return inf;
}

}  // namespace rvk

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rvk/errors.hpp"
#include "rvk/field.hpp"
#include "rvk/kernels.hpp"
#include "rvk/nonlocal_ops.hpp"
#include "rvk/quadrature.hpp"
#include "rvk/regvar.hpp"

namespace rvk {

enum class OperatorKind { PucciMinus, PucciPlus, Linear, InfSup };

// Dirichlet problem on the ball B_{2R}: operator(u) = f inside, u = g
// outside.  The grid covers the bounding cube [-2R, 2R]^n; nodes outside
// the open ball are fixed to g, and g alone provides the exterior data.
struct DirichletProblem {
  OperatorKind kind = OperatorKind::PucciMinus;
  KernelClass cls;
  KernelSpec linear_kernel;  // used when kind == Linear
  OperatorFamily family;     // used when kind == InfSup
  double R = 0.25;
  int n_side = 33;  // odd, >= 5, so that h divides 2R
  std::function<double(const Point&)> f = [](const Point&) { return 0.0; };
  std::function<double(const Point&)> g = [](const Point&) { return 0.0; };
  double g_bound = 0.0;                // finite bound on sup |g|
  std::optional<double> g_far_const;   // set when g is constant far away
  double u_scale_hint = 1.0;           // expected solution magnitude
  QuadratureConfig quad;
};

inline void validate(const DirichletProblem& p) {
  validate(p.cls);
  if (!(p.R > 0.0) || !std::isfinite(p.R))
    throw InvalidGrid("domain radius must be positive and finite");
  if (p.n_side < 5 || p.n_side % 2 == 0)
    throw InvalidGrid("n_side must be odd and at least 5");
  if (!std::isfinite(p.g_bound) || p.g_bound < 0.0)
    throw UnboundedField("exterior data needs a finite sup bound");
  if (p.kind == OperatorKind::InfSup && p.family.groups.empty())
    throw EmptyFamily("inf-sup problem needs a nonempty family");
}

inline double grid_h(const DirichletProblem& p) {
  return 4.0 * p.R / (p.n_side - 1);
}

inline Point x_of_grid_node(const DirichletProblem& p, int i, int j = 0) {
  const double h = grid_h(p);
  return Point{-2.0 * p.R + i * h,
               p.cls.dim == 2 ? -2.0 * p.R + j * h : 0.0};
}

// One mu representation: mu = scale * (sum coef_k * vals[idx_k] + const),
// mirroring second_difference of a grid field bit-for-bit up to snapping of
// on-node interpolation weights.  const collects exterior g contributions.
struct MuRep {
  double scale = 1.0;
  double const_term = 0.0;
  std::vector<std::pair<int, double>> entries;

  double value(const std::vector<double>& vals) const {
    double s = const_term;
    for (const auto& [i, c] : entries) s += c * vals[(std::size_t)i];
    return scale * s;
  }
};

struct StencilAtom {
  double log_s = 0.0;
  double w = 0.0;  // nonnegative quadrature weight, kernel weight excluded
  int rep = 0;
};

struct StencilRow {
  int node = 0;  // linear grid index of the collocation point
  std::vector<MuRep> reps;
  std::vector<StencilAtom> atoms;
  double damp_mass = 0.0;  // sum of w * |center sensitivity| per atom
};

struct DiscreteOperator {
  int dim = 1;
  int n_side = 0;
  std::vector<StencilRow> rows;

  double row_value(const StencilRow& row, const std::vector<double>& vals,
                   OperatorKind kind, const KernelSpec& lin,
                   const OperatorFamily& fam) const {
    std::vector<double> mu(row.reps.size());
    for (std::size_t k = 0; k < mu.size(); ++k)
      mu[k] = row.reps[k].value(vals);
    switch (kind) {
      case OperatorKind::PucciPlus: {
        double acc = 0.0;
        for (const auto& a : row.atoms) {
          double m = mu[(std::size_t)a.rep];
          acc += a.w * (m > 0.0 ? Lambda_ * m : lambda_ * m);
        }
        return acc;
      }
      case OperatorKind::PucciMinus: {
        double acc = 0.0;
        for (const auto& a : row.atoms) {
          double m = mu[(std::size_t)a.rep];
          acc += a.w * (m > 0.0 ? lambda_ * m : Lambda_ * m);
        }
        return acc;
      }
      case OperatorKind::Linear: {
        double acc = 0.0;
        for (const auto& a : row.atoms)
          acc += a.w * weight_at_log(lin, a.log_s) * mu[(std::size_t)a.rep];
        return acc;
      }
      case OperatorKind::InfSup: {
        if (fam.groups.empty()) throw EmptyFamily("inf-sup family is empty");
        double inf = 0.0;
        bool first_g = true;
        for (const auto& grp : fam.groups) {
          if (grp.empty()) throw EmptyFamily("inf-sup group is empty");
          double sup = 0.0;
          bool first_k = true;
          for (const auto& k : grp) {
            double acc = 0.0;
            for (const auto& a : row.atoms)
              acc += a.w * weight_at_log(k, a.log_s) * mu[(std::size_t)a.rep];
            if (first_k || acc > sup) sup = acc;
            first_k = false;
          }
          if (first_g || sup < inf) inf = sup;
          first_g = false;
        }
        return inf;
      }
    }
    throw InvalidProfile("unknown operator kind");
  }

  double lambda_ = 1.0;  // class ellipticity bounds, shared by all rows
  double Lambda_ = 1.0;
};

namespace solver_detail {

// Interpolation stencil of a point against the problem grid, mirroring
// FieldFunction::eval_raw (same locate, same clamping).  On-node weights
// within 1e-12 of 0 or 1 are snapped so collocation points contribute
// exactly through their own node.
struct GridGeom {
  int dim, n_side;
  double R;  // grid half-width is 2R
  double h;
};

template <class G>
inline void add_eval(MuRep& rep, const GridGeom& gg, const Point& pt,
                     double coef, const G& g) {
  for (int d = 0; d < gg.dim; ++d)
    if (std::abs(pt[d]) > 2.0 * gg.R) {
      rep.const_term += coef * g(pt);
      return;
    }
  auto locate = [&](int d) {
    double t = (pt[d] + 2.0 * gg.R) / gg.h;
    int i = (int)std::floor(t);
    i = std::max(0, std::min(i, gg.n_side - 2));
    double tx = std::min(std::max(t - i, 0.0), 1.0);
    if (tx < 1e-12) tx = 0.0;
    if (tx > 1.0 - 1e-12) tx = 1.0;
    return std::pair<int, double>{i, tx};
  };
  auto [i, tx] = locate(0);
  auto push = [&](int idx, double w) {
    if (w != 0.0) rep.entries.emplace_back(idx, coef * w);
  };
  if (gg.dim == 1) {
    push(i, 1.0 - tx);
    push(i + 1, tx);
    return;
  }
  auto [j, ty] = locate(1);
  push(j * gg.n_side + i, (1.0 - tx) * (1.0 - ty));
  push(j * gg.n_side + i + 1, tx * (1.0 - ty));
  push((j + 1) * gg.n_side + i, (1.0 - tx) * ty);
  push((j + 1) * gg.n_side + i + 1, tx * ty);
}

inline void merge_entries(MuRep& rep) {
  std::sort(rep.entries.begin(), rep.entries.end());
  std::size_t out = 0;
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    if (out > 0 && rep.entries[out - 1].first == rep.entries[k].first)
      rep.entries[out - 1].second += rep.entries[k].second;
    else
      rep.entries[out++] = rep.entries[k];
  }
  rep.entries.resize(out);
}

}  // namespace solver_detail

// Quadrature-collocation stencil mirroring the grid branch of build_nodes:
// inner Taylor zone in log radius below the grid inner cutoff, geometric
// rings of Gauss nodes above it, tail rings until the certified remainder
// is small relative to a data-scale reference.
inline DiscreteOperator assemble(const DirichletProblem& p) {
  validate(p);
  const QuadratureConfig& q = p.quad;
  if (q.inner_split < 2.0)
    throw NonMonotoneStencil("inner split below 2 grid spacings");
  const KernelProfile& prof = p.cls.profile;
  const ProfileBounds pb = profile_bounds(prof);
  const int dim = p.cls.dim;
  const double S0 = sphere_measure(dim);
  const double two_ms = 2.0 - prof.sigma;
  const double h = grid_h(p);
  const double r_lo = grid_inner_cutoff(h, q);
  const GaussRule& gr = gauss_rule(q.gl_order);
  const solver_detail::GridGeom gg{dim, p.n_side, p.R, h};
  const double B_ref = 2.0 * (p.g_bound + p.u_scale_hint);

  DiscreteOperator op;
  op.dim = dim;
  op.n_side = p.n_side;
  op.lambda_ = p.cls.lambda;
  op.Lambda_ = p.cls.Lambda;

  std::vector<int> interior;
  if (dim == 1) {
    for (int i = 1; i + 1 < p.n_side; ++i) interior.push_back(i);
  } else {
    for (int j = 0; j < p.n_side; ++j)
      for (int i = 0; i < p.n_side; ++i)
        if (norm2(x_of_grid_node(p, i, j), 2) < 2.0 * p.R)
          interior.push_back(j * p.n_side + i);
  }

  for (int node : interior) {
    StencilRow row;
    row.node = node;
    Point x = dim == 1 ? x_of_grid_node(p, node)
                       : x_of_grid_node(p, node % p.n_side, node / p.n_side);

    auto make_rep = [&](const Point& y, double scale) {
      MuRep rep;
      rep.scale = scale;
      solver_detail::add_eval(rep, gg, Point{x[0] + y[0], x[1] + y[1]}, 1.0,
                              p.g);
      solver_detail::add_eval(rep, gg, Point{x[0] - y[0], x[1] - y[1]}, 1.0,
                              p.g);
      solver_detail::add_eval(rep, gg, x, -2.0, p.g);
      solver_detail::merge_entries(rep);
      for (const auto& [idx, c] : rep.entries)
        if (idx != node && c < 0.0)
          throw NonMonotoneStencil("negative off-center stencil weight");
      return rep;
    };

    // Inner Taylor zone: one curvature rep per direction at scale h, shared
    // by all log-radius panels in that direction (weights carry s^2).
    {
      const double tau_in = std::log(r_lo);
      const double depth = q.taylor_depth / two_ms;
      const int panels = 12;
      const double pw = depth / panels;
      const GaussRule& gt = gauss_rule(std::max(q.gl_order, 16));
      auto zone_w = [&](double tau) {
        return two_ms * std::exp(two_ms * tau) *
               std::pow(eval_l0_log(prof.l0, tau), two_ms);
      };
      auto add_dir = [&](double cth, double sth, double ang_w) {
        row.reps.push_back(make_rep(Point{h * cth, h * sth}, 1.0 / (h * h)));
        int rep = (int)row.reps.size() - 1;
        for (int pl = 0; pl < panels; ++pl) {
          double hi = tau_in - pw * pl, lo2 = hi - pw;
          double mid = 0.5 * (lo2 + hi), half = 0.5 * (hi - lo2);
          for (std::size_t k = 0; k < gt.nodes.size(); ++k) {
            double tau = mid + half * gt.nodes[k];
            row.atoms.push_back(
                {tau, gt.weights[k] * half * zone_w(tau) * ang_w, rep});
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
    }

    double ring_w_sum = 0.0;
    auto add_ring = [&](double lo2, double hi) {
      double mid = 0.5 * (lo2 + hi), half = 0.5 * (hi - lo2);
      for (std::size_t k = 0; k < gr.nodes.size(); ++k) {
        double s = mid + half * gr.nodes[k];
        double base = gr.weights[k] * half * two_ms * eval_l(prof, s) / s;
        if (dim == 1) {
          row.reps.push_back(make_rep(Point{s, 0.0}, 1.0));
          row.atoms.push_back({std::log(s), 2.0 * base,
                               (int)row.reps.size() - 1});
          ring_w_sum += 2.0 * base;
        } else {
          const int m = q.angular_order;
          for (int j = 0; j < m; ++j) {
            double th = M_PI * (j + 0.5) / m;
            row.reps.push_back(
                make_rep(Point{s * std::cos(th), s * std::sin(th)}, 1.0));
            row.atoms.push_back({std::log(s), base * 2.0 * M_PI / m,
                                 (int)row.reps.size() - 1});
            ring_w_sum += base * 2.0 * M_PI / m;
          }
        }
      }
    };

    double edge = 1.0;
    double lo = r_lo;
    while (lo < edge) {
      double hi = std::min(lo * q.ring_factor, edge);
      add_ring(lo, hi);
      lo = hi;
    }
    if (!p.cls.truncated) {
      double dx = std::abs(x[0]) + (dim == 2 ? std::abs(x[1]) : 0.0);
      double reach =
          std::max(4.0, 2.0 * (dx + 2.0 * p.R * std::sqrt((double)dim)));
      double S = edge;
      while (true) {
        double hi = S * q.ring_factor;
        add_ring(S, hi);
        S = hi;
        if (S < reach) continue;
        double tail = S0 * two_ms * B_ref * tail_moment_bound(prof, pb, S, 0.0);
        double ref = B_ref * std::max(ring_w_sum, S0 * two_ms);
        if (tail <= q.rel_tol * ref || B_ref == 0.0) break;
        if (S > q.s_max)
          throw QuadratureFailure("tail remainder did not certify below s_max");
      }
    }

    for (const auto& a : row.atoms) {
      double d = 0.0;
      for (const auto& [idx, c] : row.reps[(std::size_t)a.rep].entries)
        if (idx == node) d += -c * row.reps[(std::size_t)a.rep].scale;
      row.damp_mass += a.w * d;
    }
    op.rows.push_back(std::move(row));
  }
  return op;
}

struct SolveResult {
  FieldFunction u;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
};

namespace solver_detail {

// Damped Jacobi sweeps: u_i += tau_i (O_i u - f_i) with tau_i from the
// center sensitivity bound, a sup-norm nonexpansive monotone update.
template <class RowOp>
inline bool jacobi_sweeps(const DiscreteOperator& op,
                          const std::vector<double>& fvals,
                          std::vector<double>& vals, double tol, int budget,
                          int& used, std::vector<double>& history,
                          const RowOp& row_op) {
  std::vector<double> res(op.rows.size());
  for (int it = 0; it < budget; ++it) {
    double rmax = 0.0;
    for (std::size_t k = 0; k < op.rows.size(); ++k) {
      res[k] = row_op(op.rows[k], vals) - fvals[k];
      rmax = std::max(rmax, std::abs(res[k]));
    }
    ++used;
    history.push_back(rmax);
    if (rmax <= tol) return true;
    for (std::size_t k = 0; k < op.rows.size(); ++k) {
      double tau = 1.0 / (op.Lambda_ * op.rows[k].damp_mass);
      vals[(std::size_t)op.rows[k].node] += tau * res[k];
    }
  }
  return false;
}

}  // namespace solver_detail

inline SolveResult solve(const DirichletProblem& p, double tol,
                         int max_iter) {
  DiscreteOperator op = assemble(p);
  const int n_vals =
      p.cls.dim == 1 ? p.n_side : p.n_side * p.n_side;
  std::vector<double> vals((std::size_t)n_vals);
  for (int k = 0; k < n_vals; ++k)
    vals[(std::size_t)k] =
        p.cls.dim == 1 ? p.g(x_of_grid_node(p, k))
                       : p.g(x_of_grid_node(p, k % p.n_side, k / p.n_side));
  std::vector<double> fvals(op.rows.size());
  for (std::size_t k = 0; k < op.rows.size(); ++k) {
    int node = op.rows[k].node;
    fvals[k] = p.cls.dim == 1
                   ? p.f(x_of_grid_node(p, node))
                   : p.f(x_of_grid_node(p, node % p.n_side, node / p.n_side));
  }

  int used = 0;
  std::vector<double> history;
  bool ok = false;

  if (p.kind != OperatorKind::InfSup) {
    auto row_op = [&](const StencilRow& r, const std::vector<double>& v) {
      return op.row_value(r, v, p.kind, p.linear_kernel, p.family);
    };
    ok = solver_detail::jacobi_sweeps(op, fvals, vals, tol, max_iter, used,
                                      history, row_op);
  } else {
    // Policy iteration: freeze the arg-extremal kernel per node, solve the
    // frozen linear problem, re-extremize; fall back to direct damped
    // iteration on the inf-sup operator if the policies keep churning.
    auto choose = [&](const std::vector<double>& v,
                      std::vector<const KernelSpec*>& pol) {
      for (std::size_t k = 0; k < op.rows.size(); ++k) {
        const StencilRow& row = op.rows[k];
        std::vector<double> mu(row.reps.size());
        for (std::size_t r = 0; r < mu.size(); ++r)
          mu[r] = row.reps[r].value(v);
        const KernelSpec* best = nullptr;
        double inf = 0.0;
        for (const auto& grp : p.family.groups) {
          const KernelSpec* gbest = nullptr;
          double sup = 0.0;
          for (const auto& ker : grp) {
            double acc = 0.0;
            for (const auto& a : row.atoms)
              acc +=
                  a.w * weight_at_log(ker, a.log_s) * mu[(std::size_t)a.rep];
            if (!gbest || acc > sup) {
              sup = acc;
              gbest = &ker;
            }
          }
          if (!best || sup < inf) {
            inf = sup;
            best = gbest;
          }
        }
        pol[k] = best;
      }
    };
    std::vector<const KernelSpec*> policy(op.rows.size(), nullptr);
    auto infsup_op = [&](const StencilRow& r, const std::vector<double>& v) {
      return op.row_value(r, v, OperatorKind::InfSup, p.linear_kernel,
                          p.family);
    };
    for (int outer = 0; outer < 50 && used < max_iter && !ok; ++outer) {
      choose(vals, policy);
      auto frozen = [&](const StencilRow& r, const std::vector<double>& v) {
        const KernelSpec* ker = policy[&r - op.rows.data()];
        return op.row_value(r, v, OperatorKind::Linear, *ker, p.family);
      };
      solver_detail::jacobi_sweeps(op, fvals, vals, tol, max_iter - used,
                                   used, history, frozen);
      // accept only if the full inf-sup residual meets the tolerance
      double rmax = 0.0;
      for (std::size_t k = 0; k < op.rows.size(); ++k)
        rmax = std::max(rmax,
                        std::abs(infsup_op(op.rows[k], vals) - fvals[k]));
      if (rmax <= tol) ok = true;
    }
    if (!ok)
      ok = solver_detail::jacobi_sweeps(op, fvals, vals, tol,
                                        max_iter - used, used, history,
                                        infsup_op);
    // the recorded history mixes frozen and full residuals; recompute the
    // final full residual for the report
    if (ok) {
      double rmax = 0.0;
      for (std::size_t k = 0; k < op.rows.size(); ++k)
        rmax = std::max(rmax,
                        std::abs(infsup_op(op.rows[k], vals) - fvals[k]));
      if (!history.empty()) history.back() = rmax;
    }
  }

  if (!ok) throw NotConverged("solver hit max_iter before tolerance");

  SolveResult out;
  out.iterations = used;
  out.converged = true;
  out.residual = history.empty() ? 0.0 : history.back();
  out.residual_history = std::move(history);
  double vmax = p.g_bound;
  for (double v : vals) vmax = std::max(vmax, std::abs(v));
  out.u = FieldFunction::make_grid(p.cls.dim, Point{0.0, 0.0}, 2.0 * p.R,
                                   p.n_side, std::move(vals), p.g, vmax,
                                   std::nullopt, p.g_far_const);
  return out;
}

}  // namespace rvk

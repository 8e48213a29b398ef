#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rvk/csv.hpp"
#include "rvk/errors.hpp"
#include "rvk/field.hpp"
#include "rvk/kernels.hpp"
#include "rvk/regvar.hpp"
#include "rvk/solver.hpp"

namespace rvk {

struct SweepConfig {
  int dim = 1;
  SlowFamily family = SlowFamily::Constant;
  std::vector<double> betas{0.0};
  std::vector<double> sigmas;
  std::vector<double> Rs{0.25};
  double lambda = 1.0;
  double Lambda = 1.0;
  double sigma0 = 0.5;
  int n_side = 33;
  int instances = 3;           // seeded data sets per (sigma, beta, R)
  double C0 = 1.0;             // right-hand-side scale in the quotient
  double uniformity_factor = 2.5;
  double tol = 1e-6;           // slack tolerance for pass flags
  double solve_tol = 1e-9;
  int max_iter = 500000;
  std::uint64_t seed = 1;
  int jobs = 1;
  QuadratureConfig quad;
};

inline void validate(const SweepConfig& cfg) {
  if (cfg.sigmas.empty() || cfg.betas.empty() || cfg.Rs.empty())
    throw ConfigError("sweep needs nonempty sigma, beta, and R lists");
  for (double s : cfg.sigmas)
    if (!(s >= cfg.sigma0 && s < 2.0))
      throw ConfigError("sweep sigma outside [sigma0, 2)");
  for (double R : cfg.Rs)
    if (!(R > 0.0) || !std::isfinite(R))
      throw ConfigError("sweep radius must be positive and finite");
  if (cfg.dim != 1 && cfg.dim != 2)
    throw ConfigError("sweep dimension must be 1 or 2");
  if (cfg.instances < 1) throw ConfigError("sweep needs at least 1 instance");
  if (!(cfg.lambda > 0.0) || !(cfg.Lambda >= cfg.lambda))
    throw ConfigError("sweep needs 0 < lambda <= Lambda");
}

// rho0 for the quotient normalization: the tightest of the Karamata band
// radius, the Potter-derived rho1, and the dimensional cap 1/(32 sqrt(n)).
inline double rho_zero(const KernelProfile& p, double sigma0, int dim) {
  const ProfileBounds pb = profile_bounds(p);
  double rho1 = compute_rho1(pb.a0, pb.ainf, sigma0);
  double rho = find_rho(p);
  return std::min({rho1, rho, 1.0 / (32.0 * std::sqrt((double)dim))});
}

namespace harness_detail {

// Deterministic parallel map: slot i is computed by exactly one worker.
inline void parallel_for(std::size_t n, int jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int k = std::min<std::size_t>((std::size_t)jobs, n);
  std::vector<std::thread> pool;
  pool.reserve((std::size_t)k);
  for (int t = 0; t < k; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = (std::size_t)t; i < n; i += (std::size_t)k) fn(i);
    });
  for (auto& th : pool) th.join();
}

// int_0^r s^k l(s) ds for k >= 1, integrated in log radius so the lower
// endpoint needs no special handling.
inline double lower_moment(const KernelProfile& p, double r, int k) {
  const double a = (double)(k + 1) - p.sigma;  // > 0 for k >= 1
  const double tau_hi = std::log(r);
  const double depth = 45.0 / a;
  const int panels = 16;
  const double pw = depth / panels;
  const GaussRule& g = gauss_rule(16);
  double acc = 0.0;
  for (int pl = 0; pl < panels; ++pl) {
    double hi = tau_hi - pw * pl, lo = hi - pw;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      double tau = mid + half * g.nodes[i];
      acc += g.weights[i] * half * std::exp(a * tau) *
             std::pow(eval_l0_log(p.l0, tau), 2.0 - p.sigma);
    }
  }
  return acc;
}

// sigma * int_1^inf l(s)/s ds: rings out to S plus the certified remainder.
inline double tail_scale_mass(const KernelProfile& p) {
  const ProfileBounds pb = profile_bounds(p);
  auto f = [&](double s) { return eval_l(p, s) / s; };
  const double S = 1e6;
  double body = integrate_rings(f, 1.0, S, 1e-9, 2.0, 16);
  return p.sigma * (body + tail_moment_bound(p, pb, S, 0.0));
}

}  // namespace harness_detail

// Verification sweep of the quantitative profile inequalities: bounds on
// the second and fourth radial moments of l, the lower bound on the scale
// function L, the tail mass cap, the Karamata ratio band, and finiteness of
// the Potter constants, over a 40-point log-spaced r grid per (beta, sigma).
inline SweepReport run_lemma_suite(const SweepConfig& cfg) {
  validate(cfg);
  SweepReport rep;
  struct Job {
    double beta, sigma;
    std::vector<SweepRow> rows;
  };
  std::vector<Job> jobs;
  for (double beta : cfg.betas)
    for (double sigma : cfg.sigmas) jobs.push_back({beta, sigma, {}});

  harness_detail::parallel_for(
      jobs.size(), cfg.jobs, [&](std::size_t ji) {
        Job& job = jobs[ji];
        KernelProfile p{job.sigma, {cfg.family, job.beta}, cfg.sigma0};
        const ProfileBounds pb = profile_bounds(p);
        const double two_ms = 2.0 - p.sigma;
        double m2_lo = 1e300, m2_hi = 1e300, m4 = 1e300, Llo = 1e300;
        for (int i = 0; i < 40; ++i) {
          double r = std::pow(10.0, -6.0 + 6.0 * i / 39.0);
          double lr = eval_l(p, r);
          double I1 = harness_detail::lower_moment(p, r, 1);
          double I3 = harness_detail::lower_moment(p, r, 3);
          double s1 = I1 * two_ms / (r * r * lr);
          m2_lo = std::min(m2_lo, s1 - 1.0 / (2.0 * pb.a0));
          m2_hi = std::min(m2_hi, 2.0 * pb.a0 - s1);
          m4 = std::min(m4, pb.a0 - I3 / (r * r * r * r * lr));
          double L = eval_L(p, r, 1e-9);
          Llo = std::min(Llo, L - (std::pow(r, -0.5 * p.sigma) - 1.0) /
                                   (2.0 * pb.a0 * pb.a0));
        }
        double tail = harness_detail::tail_scale_mass(p);
        double kr = karamata_ratio(p, 1e-4, 1e-9);
        auto row = [&](const char* q, double value, double bound, bool pass) {
          job.rows.push_back({"lemma-suite", job.sigma, job.beta, 0.0, q,
                              value, bound, pass});
        };
        const double tol = cfg.tol;
        row("moment2_lower_slack", m2_lo, 0.0, m2_lo >= -tol);
        row("moment2_upper_slack", m2_hi, 0.0, m2_hi >= -tol);
        row("moment4_slack", m4, 0.0, m4 >= -tol);
        row("scale_lower_slack", Llo, 0.0, Llo >= -tol);
        row("tail_mass", tail, 2.0 * pb.ainf, tail <= 2.0 * pb.ainf + tol);
        row("karamata_ratio", kr, 2.0, kr >= 0.5 && kr <= 2.0);
        row("potter_a0", pb.a0, 1e12, std::isfinite(pb.a0) && pb.a0 >= 1.0);
        row("potter_ainf", pb.ainf, 1e12,
            std::isfinite(pb.ainf) && pb.ainf >= 1.0);
      });

  for (auto& job : jobs)
    for (auto& r : job.rows) {
      rep.summary.all_pass = rep.summary.all_pass && r.pass;
      rep.summary.max_value = std::max(rep.summary.max_value, r.value);
      rep.rows.push_back(std::move(r));
    }
  return rep;
}

// One exterior datum for a Harnack/Hoelder instance.
struct HarnackInstance {
  std::function<double(const Point&)> g;
  double g_bound = 0.0;
  std::optional<double> g_far_const;
};

// Nonnegative sums of 1-3 Gaussian bumps with seeded centers, widths, and
// amplitudes; identical data are replayed across the sigma grid so that
// quotients at different sigma are comparable.
inline HarnackInstance seeded_instance(const SweepConfig& cfg, double R,
                                       int instance) {
  std::mt19937_64 rng(cfg.seed * 1000003ull + (std::uint64_t)instance);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int k = 1 + (int)(U(rng) * 3.0);
  k = std::min(k, 3);
  struct Bump {
    double cx, cy, w, a;
  };
  std::vector<Bump> bumps;
  double bound = 0.0;
  for (int b = 0; b < k; ++b) {
    Bump bb;
    bb.cx = (2.0 * U(rng) - 1.0) * 3.0 * R;
    bb.cy = cfg.dim == 2 ? (2.0 * U(rng) - 1.0) * 3.0 * R : 0.0;
    bb.w = (0.5 + U(rng)) * R;
    bb.a = 0.5 + U(rng);
    bound += bb.a;
    bumps.push_back(bb);
  }
  HarnackInstance inst;
  inst.g_bound = bound;
  inst.g = [bumps](const Point& x) {
    double v = 0.0;
    for (const auto& b : bumps) {
      double dx = x[0] - b.cx, dy = x[1] - b.cy;
      v += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.w * b.w));
    }
    return v;
  };
  return inst;
}

struct HarnackRow {
  double Q = 0.0;       // sup_{B_{R/2}} u / (u(0) + C0 / L(rho0 R))
  double Q_raw = 0.0;   // same with the raw C0 normalization
  double sup_half = 0.0;
  double u0 = 0.0;
  bool converged = false;
};

inline HarnackRow harnack_quotient(const SweepConfig& cfg, double sigma,
                                   double beta, double R,
                                   const HarnackInstance& inst) {
  KernelProfile p{sigma, {cfg.family, beta}, cfg.sigma0};
  DirichletProblem prob;
  prob.kind = OperatorKind::PucciMinus;
  prob.cls = KernelClass{p, cfg.lambda, cfg.Lambda, cfg.dim, false};
  prob.R = R;
  prob.n_side = cfg.n_side;
  prob.g = inst.g;
  prob.g_bound = inst.g_bound;
  prob.g_far_const = inst.g_far_const;
  prob.u_scale_hint = std::max(inst.g_bound, 1e-3);
  prob.quad = cfg.quad;

  HarnackRow out;
  SolveResult sol;
  try {
    sol = solve(prob, cfg.solve_tol * std::max(1.0, inst.g_bound),
                cfg.max_iter);
  } catch (const NotConverged&) {
    return out;
  }
  out.converged = true;

  const double h = grid_h(prob);
  const int n = prob.n_side;
  double sup = -1e300, u0 = 0.0;
  if (cfg.dim == 1) {
    for (int i = 0; i < n; ++i) {
      Point x = x_of_grid_node(prob, i);
      if (std::abs(x[0]) <= 0.5 * R + 1e-12 * R)
        sup = std::max(sup, sol.u.grid_value(i));
    }
    u0 = sol.u.grid_value(n / 2);
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Point x = x_of_grid_node(prob, i, j);
        if (norm2(x, 2) <= 0.5 * R + 1e-12 * R)
          sup = std::max(sup, sol.u.grid_value(i, j));
      }
    u0 = sol.u.grid_value(n / 2, n / 2);
  }
  (void)h;
  double rho0 = rho_zero(p, cfg.sigma0, cfg.dim);
  double denom = u0 + cfg.C0 / eval_L(p, std::min(rho0 * R, 1.0));
  out.sup_half = sup;
  out.u0 = u0;
  out.Q = sup / denom;
  out.Q_raw = sup / (u0 + cfg.C0);
  return out;
}

// Harnack-quotient sweep: extremal problems with seeded nonnegative data,
// quotient rows per (sigma, beta, R, instance), and a uniformity summary
// comparing the largest sigma against the smallest on identical data.
inline SweepReport run_harnack_sweep(const SweepConfig& cfg) {
  validate(cfg);
  struct Job {
    double sigma, beta, R;
    int instance;
    HarnackRow result;
  };
  std::vector<Job> jobs;
  for (double sigma : cfg.sigmas)
    for (double beta : cfg.betas)
      for (double R : cfg.Rs)
        for (int i = 0; i < cfg.instances; ++i)
          jobs.push_back({sigma, beta, R, i, {}});

  harness_detail::parallel_for(jobs.size(), cfg.jobs, [&](std::size_t ji) {
    Job& j = jobs[ji];
    HarnackInstance inst = seeded_instance(cfg, j.R, j.instance);
    j.result = harnack_quotient(cfg, j.sigma, j.beta, j.R, inst);
  });

  SweepReport rep;
  const double smin = *std::min_element(cfg.sigmas.begin(), cfg.sigmas.end());
  const double smax = *std::max_element(cfg.sigmas.begin(), cfg.sigmas.end());
  double ratio = 0.0;
  for (const auto& j : jobs) {
    bool ok = j.result.converged && std::isfinite(j.result.Q);
    rep.rows.push_back({"harnack", j.sigma, j.beta, j.R, "Q", j.result.Q,
                        0.0, ok});
    rep.rows.push_back({"harnack", j.sigma, j.beta, j.R, "Q_rawC0",
                        j.result.Q_raw, 0.0, ok});
    rep.summary.all_pass = rep.summary.all_pass && ok;
    rep.summary.max_value = std::max(rep.summary.max_value, j.result.Q);
    if (j.sigma == smax) {
      for (const auto& jj : jobs)
        if (jj.sigma == smin && jj.beta == j.beta && jj.R == j.R &&
            jj.instance == j.instance && jj.result.Q > 0.0)
          ratio = std::max(ratio, j.result.Q / jj.result.Q);
    }
  }
  rep.summary.uniformity_ratio = ratio;
  if (cfg.sigmas.size() > 1)
    rep.summary.all_pass =
        rep.summary.all_pass && ratio > 0.0 && ratio <= cfg.uniformity_factor;
  return rep;
}

struct HolderFit {
  double alpha = 0.0;
  double constant = 0.0;
  bool flat = false;
};

// Least-squares fit of osc(B_{2^{-j} R}) ~ C r^alpha over dyadic balls that
// still contain at least three grid nodes.
inline HolderFit fit_alpha(const FieldFunction& u, double R, int levels = 8) {
  if (u.analytic) throw InvalidGrid("fit_alpha needs a grid field");
  const double h = u.h();
  std::vector<double> lr, lo;
  double umax = 0.0;
  for (double v : u.values) umax = std::max(umax, std::abs(v));
  for (int j = 0; j < levels; ++j) {
    double r = R * std::pow(2.0, -j);
    if (r < 1.0001 * h) break;  // fewer than three nodes in the ball
    double mx = -1e300, mn = 1e300;
    for (int jj = 0; jj < (u.dim == 2 ? u.n_side : 1); ++jj)
      for (int ii = 0; ii < u.n_side; ++ii) {
        Point x{u.center[0] - u.radius + ii * h,
                u.dim == 2 ? u.center[1] - u.radius + jj * h : 0.0};
        if (norm2(Point{x[0] - u.center[0], x[1] - u.center[1]}, u.dim) >
            r * (1.0 + 1e-12))
          continue;
        double v = u.scale * u.grid_value(ii, jj);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
      }
    double osc = mx - mn;
    if (osc <= 1e-13 * (1.0 + umax)) continue;
    lr.push_back(std::log(r));
    lo.push_back(std::log(osc));
  }
  HolderFit fit;
  if (lr.size() < 2) {
    fit.flat = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = (double)lr.size();
  for (std::size_t k = 0; k < lr.size(); ++k) {
    sx += lr[k];
    sy += lo[k];
    sxx += lr[k] * lr[k];
    sxy += lr[k] * lo[k];
  }
  fit.alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  for (std::size_t k = 0; k < lr.size(); ++k)
    fit.constant = std::max(fit.constant,
                            std::exp(lo[k] - fit.alpha * lr[k]));
  return fit;
}

// Hoelder sweep: fits the oscillation-decay exponent of each solved
// instance and injects a synthetic sqrt(|x|) measurement self-test.
inline SweepReport run_holder_sweep(const SweepConfig& cfg) {
  validate(cfg);
  struct Job {
    double sigma, beta, R;
    int instance;
    HolderFit fit;
    bool converged = false;
  };
  std::vector<Job> jobs;
  for (double sigma : cfg.sigmas)
    for (double beta : cfg.betas)
      for (double R : cfg.Rs)
        for (int i = 0; i < cfg.instances; ++i)
          jobs.push_back({sigma, beta, R, i, {}, false});

  harness_detail::parallel_for(jobs.size(), cfg.jobs, [&](std::size_t ji) {
    Job& j = jobs[ji];
    HarnackInstance inst = seeded_instance(cfg, j.R, j.instance);
    KernelProfile p{j.sigma, {cfg.family, j.beta}, cfg.sigma0};
    DirichletProblem prob;
    prob.kind = OperatorKind::PucciMinus;
    prob.cls = KernelClass{p, cfg.lambda, cfg.Lambda, cfg.dim, false};
    prob.R = j.R;
    prob.n_side = cfg.n_side;
    prob.g = inst.g;
    prob.g_bound = inst.g_bound;
    prob.u_scale_hint = std::max(inst.g_bound, 1e-3);
    prob.quad = cfg.quad;
    try {
      SolveResult sol = solve(
          prob, cfg.solve_tol * std::max(1.0, inst.g_bound), cfg.max_iter);
      j.fit = fit_alpha(sol.u, j.R);
      j.converged = true;
    } catch (const NotConverged&) {
    }
  });

  SweepReport rep;
  for (const auto& j : jobs) {
    bool ok = j.converged && (j.fit.flat || j.fit.alpha > 0.0);
    rep.rows.push_back({"holder", j.sigma, j.beta, j.R,
                        j.fit.flat ? "alpha_flat" : "alpha",
                        j.fit.flat ? 0.0 : j.fit.alpha, 0.0, ok});
    rep.rows.push_back({"holder", j.sigma, j.beta, j.R, "holder_constant",
                        j.fit.constant, 0.0, ok});
    rep.summary.all_pass = rep.summary.all_pass && ok;
    if (!j.fit.flat)
      rep.summary.max_value = std::max(rep.summary.max_value, j.fit.alpha);
  }

  // synthetic |x|^{1/2} measurement self-test on the sweep grid
  {
    const double R = cfg.Rs.front();
    const int n = cfg.n_side;
    const double h = 4.0 * R / (n - 1);
    std::size_t count = cfg.dim == 2 ? (std::size_t)n * n : (std::size_t)n;
    std::vector<double> vals(count);
    for (int j = 0; j < (cfg.dim == 2 ? n : 1); ++j)
      for (int i = 0; i < n; ++i) {
        Point x{-2.0 * R + i * h, cfg.dim == 2 ? -2.0 * R + j * h : 0.0};
        vals[(std::size_t)(cfg.dim == 2 ? j * n + i : i)] =
            std::sqrt(norm2(x, cfg.dim));
      }
    FieldFunction su = FieldFunction::make_grid(
        cfg.dim, {0.0, 0.0}, 2.0 * R, n, std::move(vals),
        [d = cfg.dim](const Point& x) { return std::sqrt(norm2(x, d)); },
        std::sqrt(2.0 * R) * 2.0);
    HolderFit fit = fit_alpha(su, R);
    bool ok = !fit.flat && std::abs(fit.alpha - 0.5) <= 0.02;
    rep.rows.push_back(
        {"holder-selftest", 0.0, 0.0, R, "alpha", fit.alpha, 0.5, ok});
    rep.summary.all_pass = rep.summary.all_pass && ok;
  }

  // uniformity of the fitted exponent across sigma (max/min over non-flat)
  double amin = 1e300, amax = 0.0;
  for (const auto& j : jobs)
    if (j.converged && !j.fit.flat) {
      amin = std::min(amin, j.fit.alpha);
      amax = std::max(amax, j.fit.alpha);
    }
  rep.summary.uniformity_ratio = amax > 0.0 && amin < 1e300 ? amax / amin
                                                            : 0.0;
  return rep;
}

inline std::string sweep_echo(const SweepConfig& cfg) {
  std::ostringstream ss;
  ss << "dim = " << cfg.dim << "\nfamily = " << family_name(cfg.family)
     << "\nbetas =";
  for (double b : cfg.betas) ss << ' ' << b;
  ss << "\nsigmas =";
  for (double s : cfg.sigmas) ss << ' ' << s;
  ss << "\nR =";
  for (double r : cfg.Rs) ss << ' ' << r;
  ss << "\nlambda = " << cfg.lambda << "\nLambda = " << cfg.Lambda
     << "\nsigma0 = " << cfg.sigma0 << "\nn_side = " << cfg.n_side
     << "\ninstances = " << cfg.instances << "\nC0 = " << cfg.C0
     << "\nuniformity_factor = " << cfg.uniformity_factor
     << "\ntol = " << cfg.tol << "\nseed = " << cfg.seed
     << "\njobs = " << cfg.jobs << "\n";
  return ss.str();
}

}  // namespace rvk

// Command-line laboratory for integro-differential operators with regularly
// varying kernels: profile checks, operator evaluation, barrier
// certification, Dirichlet solves, and sigma-sweep experiments with CSV
// output.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rvk/barriers.hpp"
#include "rvk/config.hpp"
#include "rvk/csv.hpp"
#include "rvk/envelope.hpp"
#include "rvk/harness.hpp"
#include "rvk/solver.hpp"

using namespace rvk;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;  // 0 = keep config value
  int jobs = 0;            // 0 = keep config value
  double tol = 0.0;        // 0 = keep config value
};

SweepConfig sweep_from_config(const Config& c, const GlobalOpts& g) {
  SweepConfig cfg;
  cfg.dim = c.get_int("sweep", "dim", cfg.dim);
  cfg.family =
      family_from_name(c.get_string("sweep", "family", "Constant"));
  if (c.has("sweep", "betas")) cfg.betas = c.get_doubles("sweep", "betas");
  if (c.has("sweep", "sigmas")) cfg.sigmas = c.get_doubles("sweep", "sigmas");
  if (cfg.sigmas.empty()) cfg.sigmas = {1.0, 1.5, 1.9, 1.99};
  if (c.has("sweep", "R")) cfg.Rs = c.get_doubles("sweep", "R");
  cfg.lambda = c.get_double("sweep", "lambda", cfg.lambda);
  cfg.Lambda = c.get_double("sweep", "Lambda", cfg.Lambda);
  cfg.sigma0 = c.get_double("sweep", "sigma0", cfg.sigma0);
  cfg.n_side = c.get_int("sweep", "n_side", cfg.n_side);
  cfg.instances = c.get_int("sweep", "instances", cfg.instances);
  cfg.C0 = c.get_double("sweep", "C0", cfg.C0);
  cfg.uniformity_factor =
      c.get_double("sweep", "uniformity_factor", cfg.uniformity_factor);
  cfg.tol = c.get_double("sweep", "tol", cfg.tol);
  cfg.solve_tol = c.get_double("sweep", "solve_tol", cfg.solve_tol);
  cfg.max_iter = c.get_int("sweep", "max_iter", cfg.max_iter);
  cfg.seed = (std::uint64_t)c.get_int("sweep", "seed", (int)cfg.seed);
  cfg.jobs = c.get_int("sweep", "jobs", cfg.jobs);
  cfg.quad.rel_tol = c.get_double("quadrature", "rel_tol", cfg.quad.rel_tol);
  cfg.quad.gl_order = c.get_int("quadrature", "gl_order", cfg.quad.gl_order);
  cfg.quad.angular_order =
      c.get_int("quadrature", "angular_order", cfg.quad.angular_order);
  if (g.seed != 0) cfg.seed = g.seed;
  if (g.jobs != 0) cfg.jobs = g.jobs;
  if (g.tol != 0.0) cfg.tol = g.tol;
  return cfg;
}

int finish(const SweepReport& rep, const GlobalOpts& g,
           const std::string& echo) {
  if (!g.out_path.empty()) emit(rep, g.out_path, echo);
  std::size_t passed = 0;
  for (const auto& r : rep.rows)
    if (r.pass) ++passed;
  std::cout << passed << "/" << rep.rows.size() << " rows pass; max value "
            << csv_detail::num(rep.summary.max_value)
            << ", uniformity ratio "
            << csv_detail::num(rep.summary.uniformity_ratio) << "\n";
  return rep.all_pass() ? 0 : 1;
}

// Profile sanity rows: normalization, scale-function monotonicity, the
// Karamata band, and finite Potter constants per (beta, sigma).
SweepReport run_regvar_check(const SweepConfig& cfg) {
  validate(cfg);
  SweepReport rep;
  for (double beta : cfg.betas)
    for (double sigma : cfg.sigmas) {
      KernelProfile p{sigma, {cfg.family, beta}, cfg.sigma0};
      double n0 = eval_l0(p.l0, 1.0);
      rep.rows.push_back({"regvar-check", sigma, beta, 0.0, "l0_at_1", n0,
                          1.0, n0 == 1.0});
      double worst = 0.0;
      double prev = eval_L(p, 1e-6);
      bool monotone = true;
      for (int i = 1; i < 40; ++i) {
        double r = std::pow(10.0, -6.0 + 6.0 * i / 39.0);
        double L = eval_L(p, r);
        if (L > prev * (1.0 + 1e-12)) monotone = false;
        worst = std::max(worst, L);
        prev = L;
      }
      rep.rows.push_back({"regvar-check", sigma, beta, 0.0, "L_monotone",
                          monotone ? 1.0 : 0.0, 1.0, monotone});
      double kr = karamata_ratio(p, 1e-4);
      rep.rows.push_back({"regvar-check", sigma, beta, 0.0, "karamata_ratio",
                          kr, 2.0, kr >= 0.5 && kr <= 2.0});
      const ProfileBounds pb = profile_bounds(p);
      rep.rows.push_back({"regvar-check", sigma, beta, 0.0, "potter_a0",
                          pb.a0, 1e12,
                          std::isfinite(pb.a0) && pb.a0 >= 1.0});
      for (const auto& r : rep.rows)
        rep.summary.all_pass = rep.summary.all_pass && r.pass;
      rep.summary.max_value = std::max(rep.summary.max_value, kr);
    }
  return rep;
}

// Extremal operators of the canonical bump max(0, 1 - |x|^2) at a point.
SweepReport run_op_eval(const SweepConfig& cfg, double x0) {
  validate(cfg);
  SweepReport rep;
  for (double beta : cfg.betas)
    for (double sigma : cfg.sigmas) {
      KernelProfile p{sigma, {cfg.family, beta}, cfg.sigma0};
      KernelClass cls{p, cfg.lambda, cfg.Lambda, cfg.dim, false};
      FieldFunction u = FieldFunction::make_analytic(
          cfg.dim,
          [d = cfg.dim](const Point& x) {
            return std::max(0.0, 1.0 - norm2(x, d) * norm2(x, d));
          },
          1.0, 1.0);
      Point x{x0, 0.0};
      OpResult mp = pucci_plus_result(u, x, cls, cfg.quad);
      OpResult mm = pucci_minus_result(u, x, cls, cfg.quad);
      bool ok = std::isfinite(mp.value) && std::isfinite(mm.value) &&
                mm.value <= mp.value + mp.error_bound + mm.error_bound;
      rep.rows.push_back({"op-eval", sigma, beta, 0.0, "pucci_plus",
                          mp.value, mp.error_bound, ok});
      rep.rows.push_back({"op-eval", sigma, beta, 0.0, "pucci_minus",
                          mm.value, mm.error_bound, ok});
      rep.summary.all_pass = rep.summary.all_pass && ok;
      rep.summary.max_value =
          std::max(rep.summary.max_value, std::abs(mp.value));
    }
  return rep;
}

// Power-barrier certification rows per sigma, plus the comparison scale.
SweepReport run_barrier_verify(const SweepConfig& cfg, double R,
                               double kappa1) {
  validate(cfg);
  SweepReport rep;
  for (double beta : cfg.betas)
    for (double sigma : cfg.sigmas) {
      KernelProfile prof{sigma, {cfg.family, beta}, cfg.sigma0};
      KernelClass cls{prof, cfg.lambda, cfg.Lambda, cfg.dim, false};
      PowerBarrierSpec spec;
      spec.cls = cls;
      spec.R = R;
      spec.kappa1 = kappa1;
      spec.p = choose_p(cfg.dim, cfg.lambda, cfg.Lambda);
      bool ok = true;
      double eps0 = 0.0, minv = 0.0;
      try {
        eps0 = find_epsilon0(spec, cfg.quad, cfg.tol);
        spec.eps0 = eps0;
        SubsolutionReport sub =
            verify_subsolution(power_barrier_field(spec),
                               Annulus{spec.kappa1 * spec.R, spec.R}, cls,
                               cfg.quad, 64, -cfg.tol);
        ok = sub.passes;
        minv = sub.min_value;
      } catch (const NotConverged&) {
        ok = false;
      }
      rep.rows.push_back({"barrier-verify", sigma, beta, R, "eps0", eps0,
                          1.0 / 16.0, ok});
      rep.rows.push_back({"barrier-verify", sigma, beta, R,
                          "min_pucci_minus", minv, -cfg.tol, ok});
      double dR = comparison_delta_R(cls, R, cfg.quad);
      rep.rows.push_back({"barrier-verify", sigma, beta, R, "delta_R", dR,
                          0.0, dR > 0.0});
      rep.summary.all_pass = rep.summary.all_pass && ok && dR > 0.0;
      rep.summary.max_value = std::max(rep.summary.max_value, dR);
    }
  return rep;
}

// One Dirichlet solve from the [problem] config section; writes node
// coordinates and values as CSV.
int run_solve(const Config& c, const GlobalOpts& g) {
  SweepConfig scfg = sweep_from_config(c, g);
  DirichletProblem prob;
  std::string kind = c.get_string("problem", "operator", "PucciMinus");
  if (kind == "PucciMinus")
    prob.kind = OperatorKind::PucciMinus;
  else if (kind == "PucciPlus")
    prob.kind = OperatorKind::PucciPlus;
  else if (kind == "Linear")
    prob.kind = OperatorKind::Linear;
  else
    throw ConfigError("unknown operator kind: " + kind);
  double sigma = c.get_double("problem", "sigma", 1.5);
  double beta = c.get_double("problem", "beta", 0.0);
  KernelProfile p{sigma, {scfg.family, beta}, scfg.sigma0};
  prob.cls = KernelClass{p, scfg.lambda, scfg.Lambda, scfg.dim, false};
  prob.linear_kernel = KernelSpec{prob.cls, WeightKind::ConstLower, 0.0};
  prob.R = c.get_double("problem", "R", 0.25);
  prob.n_side = c.get_int("problem", "n_side", scfg.n_side);
  double fconst = c.get_double("problem", "f", 0.0);
  prob.f = [fconst](const Point&) { return fconst; };
  prob.quad = scfg.quad;
  std::string gkind = c.get_string("problem", "g", "seeded");
  if (gkind == "seeded") {
    HarnackInstance inst = seeded_instance(scfg, prob.R, 0);
    prob.g = inst.g;
    prob.g_bound = inst.g_bound;
  } else {
    double gc = c.get_double("problem", "g", 0.0);
    prob.g = [gc](const Point&) { return gc; };
    prob.g_bound = std::abs(gc);
    prob.g_far_const = gc;
  }

  SolveResult sol = solve(prob, scfg.solve_tol, scfg.max_iter);
  std::cout << "converged in " << sol.iterations << " sweeps, residual "
            << csv_detail::num(sol.residual) << "\n";
  if (!g.out_path.empty()) {
    std::ofstream out(g.out_path, std::ios::binary | std::ios::trunc);
    if (!out.good()) throw IoError("cannot open output file: " + g.out_path);
    out << (scfg.dim == 2 ? "x,y,value\n" : "x,value\n");
    for (int j = 0; j < (scfg.dim == 2 ? prob.n_side : 1); ++j)
      for (int i = 0; i < prob.n_side; ++i) {
        Point x = x_of_grid_node(prob, i, j);
        out << csv_detail::num(x[0]);
        if (scfg.dim == 2) out << ',' << csv_detail::num(x[1]);
        out << ',' << csv_detail::num(sol.u.grid_value(i, j)) << '\n';
      }
    std::ofstream meta(g.out_path + ".meta",
                       std::ios::binary | std::ios::trunc);
    meta << "tool = " << kToolVersion << "\noperator = " << kind
         << "\nsigma = " << csv_detail::num(sigma)
         << "\nR = " << csv_detail::num(prob.R)
         << "\nn_side = " << prob.n_side
         << "\nresidual = " << csv_detail::num(sol.residual)
         << "\niterations = " << sol.iterations << "\n";
  }
  return sol.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for nonlocal extremal operators"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "config file (INI sections)");
  app.add_option("--out", g.out_path, "output CSV path");
  app.add_option("--seed", g.seed, "override RNG seed");
  app.add_option("--jobs", g.jobs, "worker threads for sweeps");
  app.add_option("--tol", g.tol, "override slack tolerance");

  auto* c_regvar = app.add_subcommand("regvar-check", "profile sanity rows");
  auto* c_op = app.add_subcommand("op-eval", "extremal operators of a bump");
  double op_x = 0.0;
  c_op->add_option("--x", op_x, "evaluation point (first coordinate)");
  auto* c_barrier =
      app.add_subcommand("barrier-verify", "power barrier certification");
  double b_R = 0.4, b_kappa1 = 0.1;
  c_barrier->add_option("--R", b_R, "barrier radius");
  c_barrier->add_option("--kappa1", b_kappa1, "inner annulus fraction");
  auto* c_solve = app.add_subcommand("solve", "one Dirichlet solve");
  auto* c_harnack =
      app.add_subcommand("harnack-sweep", "Harnack quotient sweep");
  auto* c_holder =
      app.add_subcommand("holder-sweep", "oscillation-decay exponent sweep");
  auto* c_lemma =
      app.add_subcommand("lemma-suite", "profile inequality verification");
  for (auto* sub : {c_regvar, c_op, c_barrier, c_solve, c_harnack, c_holder,
                    c_lemma})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfile;
    if (!g.config_path.empty()) cfile = load_config(g.config_path);
    SweepConfig cfg = sweep_from_config(cfile, g);
    const std::string echo = sweep_echo(cfg);

    if (c_regvar->parsed()) return finish(run_regvar_check(cfg), g, echo);
    if (c_op->parsed()) return finish(run_op_eval(cfg, op_x), g, echo);
    if (c_barrier->parsed())
      return finish(run_barrier_verify(cfg, b_R, b_kappa1), g, echo);
    if (c_solve->parsed()) return run_solve(cfile, g);
    if (c_harnack->parsed()) return finish(run_harnack_sweep(cfg), g, echo);
    if (c_holder->parsed()) return finish(run_holder_sweep(cfg), g, echo);
    if (c_lemma->parsed()) return finish(run_lemma_suite(cfg), g, echo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rvk/errors.hpp"
#include "rvk/quadrature.hpp"

namespace rvk {

// Slowly varying factors l0 normalized so that l0(1) = 1.  The log-based
// families are only meaningful for small r; past the point where the inner
// expression drops below its threshold they continue as constants, which
// keeps them positive and slowly varying at infinity without touching the
// behaviour near zero.
enum class SlowFamily {
  Constant,
  LogPow,           // (log(2/r))^beta
  LogSqPow,         // (log(2/r^2))^beta
  LogLogPow,        // (log log(2/r))^beta, inner log clamped at 1
  ExpLogPow,        // exp((log(2/r))^beta), beta in (0,1)
  ExpLogOverLogLog  // exp(log(2/r) / log log(2/r))
};

struct SlowlyVaryingSpec {
  SlowFamily family = SlowFamily::Constant;
  double beta = 0.0;
};

inline void validate(const SlowlyVaryingSpec& s) {
  if (s.family == SlowFamily::ExpLogPow && !(s.beta > 0.0 && s.beta < 1.0))
    throw InvalidProfile("ExpLogPow requires beta in (0,1)");
  if (!std::isfinite(s.beta)) throw InvalidProfile("beta must be finite");
}

namespace detail {

// Unnormalized l0 as a function of t = log(2/r); working in t keeps the
// small-r regime representable far beyond where r itself underflows.
inline double raw_l0_t(const SlowlyVaryingSpec& s, double t) {
  switch (s.family) {
    case SlowFamily::Constant:
      return 1.0;
    case SlowFamily::LogPow:
      return std::pow(std::max(t, 0.5), s.beta);
    case SlowFamily::LogSqPow:
      return std::pow(std::max(2.0 * t - std::log(2.0), 0.5), s.beta);
    case SlowFamily::LogLogPow:
      return std::pow(t > M_E ? std::log(t) : 1.0, s.beta);
    case SlowFamily::ExpLogPow:
      return std::exp(std::pow(std::max(t, 0.5), s.beta));
    case SlowFamily::ExpLogOverLogLog:
      return (t > M_E) ? std::exp(t / std::log(t)) : std::exp(M_E);
  }
  throw InvalidProfile("unknown slowly varying family");
}

inline double raw_l0(const SlowlyVaryingSpec& s, double r) {
  return raw_l0_t(s, std::log(2.0 / r));
}

}  // namespace detail

// l0 evaluated at r = e^{log_r}, usable for arbitrarily negative log_r.
inline double eval_l0_log(const SlowlyVaryingSpec& s, double log_r) {
  validate(s);
  if (s.family == SlowFamily::Constant) return 1.0;
  return detail::raw_l0_t(s, std::log(2.0) - log_r) /
         detail::raw_l0_t(s, std::log(2.0));
}

inline double eval_l0(const SlowlyVaryingSpec& s, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("eval_l0 needs r > 0");
  validate(s);
  if (s.family == SlowFamily::Constant) return 1.0;
  return detail::raw_l0(s, r) / detail::raw_l0(s, 1.0);
}

// Kernel profile l(r) = r^{-sigma} l0(r)^{2-sigma}, indexed by order sigma
// in [sigma0, 2).
struct KernelProfile {
  double sigma = 1.0;
  SlowlyVaryingSpec l0;
  double sigma0 = 0.5;
};

inline void validate(const KernelProfile& p) {
  validate(p.l0);
  if (!(p.sigma0 > 0.0 && p.sigma0 < 2.0))
    throw InvalidProfile("sigma0 must lie in (0,2)");
  if (!(p.sigma >= p.sigma0 && p.sigma < 2.0))
    throw InvalidProfile("sigma must lie in [sigma0, 2)");
}

inline double eval_l(const KernelProfile& p, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("eval_l needs r > 0");
  validate(p);
  return std::pow(r, -p.sigma) * std::pow(eval_l0(p.l0, r), 2.0 - p.sigma);
}

// Scale function L(r) = sigma * int_r^1 l(s)/s ds for r in (0,1].
// The Constant family short-circuits to the closed form r^{-sigma} - 1.
inline double eval_L(const KernelProfile& p, double r, double rel_tol = 1e-9) {
  if (!(r > 0.0) || !(r <= 1.0)) throw DomainError("eval_L needs r in (0,1]");
  validate(p);
  if (p.l0.family == SlowFamily::Constant)
    return std::pow(r, -p.sigma) - 1.0;
  if (r == 1.0) return 0.0;
  auto f = [&](double s) { return eval_l(p, s) / s; };
  return p.sigma * integrate_rings(f, r, 1.0, rel_tol, 2.0, 16);
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct PotterEstimate {
  double a = 1.0;
  double delta = 0.0;
  Interval domain;
  bool valid = false;
};

inline double potter_delta_window(const KernelProfile& p) {
  return 0.5 * std::min(2.0 - p.sigma, p.sigma);
}

// Smallest a (up to grid resolution) with
//   l(s)/l(r) <= a * max((s/r)^{-sigma+delta}, (s/r)^{-sigma-delta})
// for r, s on a log grid over the given interval.
inline PotterEstimate potter_constants(const KernelProfile& p, double delta,
                                       Interval domain,
                                       int points_per_decade = 200,
                                       double a_cap = 1e12) {
  validate(p);
  if (!(delta >= 0.0) || delta >= potter_delta_window(p))
    throw InvalidDelta("delta must lie in [0, min(2-sigma, sigma)/2)");
  if (!(domain.lo > 0.0) || !(domain.hi > domain.lo))
    throw InvalidGrid("potter domain must satisfy 0 < lo < hi");
  double lg_lo = std::log10(domain.lo), lg_hi = std::log10(domain.hi);
  int n = std::max(2, (int)std::ceil((lg_hi - lg_lo) * points_per_decade) + 1);
  std::vector<double> x(n), ll(n);
  for (int i = 0; i < n; ++i) {
    double lg = lg_lo + (lg_hi - lg_lo) * i / (n - 1);
    double r = std::pow(10.0, lg);
    x[i] = std::log(r);
    ll[i] = std::log(eval_l(p, r));
  }
  double worst = 0.0;  // log of a; pair (r,r) gives 0
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double d = x[j] - x[i];  // log(s/r)
      double bound = -p.sigma * d + delta * std::abs(d);
      worst = std::max(worst, ll[j] - ll[i] - bound);
    }
  }
  PotterEstimate est;
  est.delta = delta;
  est.domain = domain;
  est.a = std::exp(worst);
  est.valid = est.a <= a_cap;
  return est;
}

inline double karamata_ratio(const KernelProfile& p, double r,
                             double rel_tol = 1e-9) {
  return eval_L(p, r, rel_tol) / eval_l(p, r);
}

// Largest rho (conservative, on a log grid from 1 down to 1e-8 with 64
// points per decade) such that L/l stays in [1/2, 2] for all grid r < rho.
inline double find_rho(const KernelProfile& p, double band_lo = 0.5,
                       double band_hi = 2.0) {
  validate(p);
  const int per_decade = 64, decades = 8;
  const int n = per_decade * decades + 1;
  double rho = 0.0;
  bool any = false;
  // ascending in r: grid point i has log10 r = -8 + i/64
  for (int i = 0; i < n; ++i) {
    double r = std::pow(10.0, -decades + (double)i / per_decade);
    if (r >= 1.0) r = 1.0;
    double q = karamata_ratio(p, r);
    if (q >= band_lo && q <= band_hi) {
      rho = r;
      any = true;
    } else {
      break;
    }
  }
  if (!any) throw NotFound("no grid point with L/l inside the band");
  return rho;
}

// rho1 = (4 a0^2 a_inf + 1)^{-2/sigma0}, optionally capped by
// min(rho, 1/2) when a rho from find_rho is available.
inline double compute_rho1(double a0, double a_inf, double sigma0,
                           double rho_cap = -1.0) {
  if (!(a0 >= 1.0) || !(a_inf >= 1.0))
    throw InvalidProfile("potter constants must be >= 1");
  if (!(sigma0 > 0.0 && sigma0 < 2.0))
    throw InvalidProfile("sigma0 must lie in (0,2)");
  double rho1 = std::pow(4.0 * a0 * a0 * a_inf + 1.0, -2.0 / sigma0);
  if (rho_cap > 0.0) rho1 = std::min(rho1, std::min(rho_cap, 0.5));
  return rho1;
}

inline std::string family_name(SlowFamily f) {
  switch (f) {
    case SlowFamily::Constant: return "Constant";
    case SlowFamily::LogPow: return "LogPow";
    case SlowFamily::LogSqPow: return "LogSqPow";
    case SlowFamily::LogLogPow: return "LogLogPow";
    case SlowFamily::ExpLogPow: return "ExpLogPow";
    case SlowFamily::ExpLogOverLogLog: return "ExpLogOverLogLog";
  }
  return "?";
}

inline SlowFamily family_from_name(const std::string& s) {
  if (s == "Constant") return SlowFamily::Constant;
  if (s == "LogPow") return SlowFamily::LogPow;
  if (s == "LogSqPow") return SlowFamily::LogSqPow;
  if (s == "LogLogPow") return SlowFamily::LogLogPow;
  if (s == "ExpLogPow") return SlowFamily::ExpLogPow;
  if (s == "ExpLogOverLogLog") return SlowFamily::ExpLogOverLogLog;
  throw InvalidProfile("unknown family name: " + s);
}

}  // namespace rvk

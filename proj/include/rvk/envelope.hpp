#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "rvk/errors.hpp"
#include "rvk/field.hpp"
#include "rvk/kernels.hpp"
#include "rvk/regvar.hpp"

namespace rvk {

namespace envelope_detail {

// Canonical affine evaluators shared by the hull construction and by any
// reference computation: a query that coincides with a defining sample
// returns that sample's value exactly, so vertex values never pick up
// interpolation rounding.
inline double line_eval(const std::vector<double>& xs,
                        const std::vector<double>& zs, int i, int j,
                        double xq) {
  if (xq == xs[i]) return zs[i];
  if (xq == xs[j]) return zs[j];
  return zs[i] + (zs[j] - zs[i]) * (xq - xs[i]) / (xs[j] - xs[i]);
}

inline double plane_eval(const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::vector<double>& zs, int i, int j, int k,
                         double xq, double yq) {
  if (xq == xs[i] && yq == ys[i]) return zs[i];
  if (xq == xs[j] && yq == ys[j]) return zs[j];
  if (xq == xs[k] && yq == ys[k]) return zs[k];
  const double dx1 = xs[j] - xs[i], dy1 = ys[j] - ys[i], dz1 = zs[j] - zs[i];
  const double dx2 = xs[k] - xs[i], dy2 = ys[k] - ys[i], dz2 = zs[k] - zs[i];
  const double det = dx1 * dy2 - dx2 * dy1;
  if (det == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double gx = (dz1 * dy2 - dz2 * dy1) / det;
  const double gy = (dx1 * dz2 - dx2 * dz1) / det;
  return zs[i] + gx * (xq - xs[i]) + gy * (yq - ys[i]);
}

}  // namespace envelope_detail

struct EnvelopeResult {
  std::vector<double> gamma;        // least concave majorant of u^+ at nodes
  std::vector<int> contact;         // interior node indices with u^+ = gamma
  std::vector<Point> supergradients;  // least-norm superdifferential element
  double eps_contact = 0.0;
};

inline Point x_of_node(const FieldFunction& u, int idx) {
  const double hh = u.h();
  if (u.dim == 1) return {u.center[0] - u.radius + hh * idx, 0.0};
  int i = idx % u.n_side, j = idx / u.n_side;
  return {u.center[0] - u.radius + hh * i, u.center[1] - u.radius + hh * j};
}

namespace envelope_detail {

// Upper concave chain (monotone scan): keeps exactly the vertices strictly
// above every chord of their neighbors.
inline std::vector<int> upper_chain(const std::vector<double>& xs,
                                    const std::vector<double>& zs) {
  std::vector<int> st;
  for (int c = 0; c < (int)xs.size(); ++c) {
    while (st.size() >= 2) {
      int a = st[st.size() - 2], b = st.back();
      // keep b only if strictly above the chord a-c
      if ((zs[b] - zs[a]) * (xs[c] - xs[a]) >
          (zs[c] - zs[a]) * (xs[b] - xs[a]))
        break;
      st.pop_back();
    }
    st.push_back(c);
  }
  return st;
}

// Incremental 3d convex hull of the lifted samples; returns the upper
// facets (outward normal with positive vertical component).  Corner-first
// insertion keeps every later point horizontally inside the working hull.
struct Face {
  int a, b, c;
};

inline double orient(const std::vector<double>& xs,
                     const std::vector<double>& ys,
                     const std::vector<double>& zs, const Face& f, int d) {
  const double ax = xs[f.b] - xs[f.a], ay = ys[f.b] - ys[f.a],
               az = zs[f.b] - zs[f.a];
  const double bx = xs[f.c] - xs[f.a], by = ys[f.c] - ys[f.a],
               bz = zs[f.c] - zs[f.a];
  const double nx = ay * bz - az * by, ny = az * bx - ax * bz,
               nz = ax * by - ay * bx;
  return nx * (xs[d] - xs[f.a]) + ny * (ys[d] - ys[f.a]) +
         nz * (zs[d] - zs[f.a]);
}

inline bool upper_facets(const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::vector<double>& zs,
                         const std::vector<int>& order,
                         std::vector<Face>& out) {
  const int m = (int)order.size();
  // initial affinely independent quadruple, respecting the order
  int i0 = order[0], i1 = -1, i2 = -1, i3 = -1;
  for (int t = 1; t < m && i1 < 0; ++t)
    if (xs[order[t]] != xs[i0] || ys[order[t]] != ys[i0] ||
        zs[order[t]] != zs[i0])
      i1 = order[t];
  if (i1 < 0) return false;
  for (int t = 1; t < m && i2 < 0; ++t) {
    int c = order[t];
    if (c == i1) continue;
    double ax = xs[i1] - xs[i0], ay = ys[i1] - ys[i0], az = zs[i1] - zs[i0];
    double bx = xs[c] - xs[i0], by = ys[c] - ys[i0], bz = zs[c] - zs[i0];
    double cx = ay * bz - az * by, cy = az * bx - ax * bz,
           cz = ax * by - ay * bx;
    if (cx != 0.0 || cy != 0.0 || cz != 0.0) i2 = c;
  }
  if (i2 < 0) return false;
  for (int t = 1; t < m && i3 < 0; ++t) {
    int c = order[t];
    if (c == i1 || c == i2) continue;
    if (orient(xs, ys, zs, Face{i0, i1, i2}, c) != 0.0) i3 = c;
  }
  if (i3 < 0) return false;

  std::vector<Face> faces;
  auto add_face = [&](int a, int b, int c, int opposite) {
    Face f{a, b, c};
    if (orient(xs, ys, zs, f, opposite) > 0.0) std::swap(f.b, f.c);
    faces.push_back(f);
  };
  add_face(i0, i1, i2, i3);
  add_face(i0, i1, i3, i2);
  add_face(i0, i2, i3, i1);
  add_face(i1, i2, i3, i0);

  for (int t = 1; t < m; ++t) {
    int p = order[t];
    if (p == i1 || p == i2 || p == i3) continue;
    std::vector<char> vis(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      vis[f] = orient(xs, ys, zs, faces[f], p) > 0.0;
      any |= vis[f];
    }
    if (!any) continue;  // inside or on the hull
    // horizon: directed edges of visible faces whose reverse is not visible
    std::map<std::pair<int, int>, int> dir;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!vis[f]) continue;
      const Face& fc = faces[f];
      ++dir[{fc.a, fc.b}];
      ++dir[{fc.b, fc.c}];
      ++dir[{fc.c, fc.a}];
    }
    std::vector<Face> next;
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (!vis[f]) next.push_back(faces[f]);
    for (const auto& [e, cnt] : dir) {
      (void)cnt;
      if (dir.count({e.second, e.first})) continue;
      next.push_back(Face{e.first, e.second, p});
    }
    faces.swap(next);
  }

  out.clear();
  for (const Face& f : faces) {
    double nz = (xs[f.b] - xs[f.a]) * (ys[f.c] - ys[f.a]) -
                (ys[f.b] - ys[f.a]) * (xs[f.c] - xs[f.a]);
    if (nz > 0.0) out.push_back(f);
  }
  return !out.empty();
}

// Reference construction: minimum over every dominating plane through
// three samples.  Exact but cubic in the sample count; used as the safety
// net when the incremental hull hits a degeneracy it cannot order.
inline std::vector<double> envelope_by_planes(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& zs) {
  const int m = (int)xs.size();
  std::vector<double> g(m);
  std::vector<bool> started(m, false);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        bool dom = true;
        for (int t = 0; t < m && dom; ++t)
          dom = plane_eval(xs, ys, zs, i, j, k, xs[t], ys[t]) >= zs[t];
        if (!dom) continue;
        for (int v = 0; v < m; ++v) {
          double val = plane_eval(xs, ys, zs, i, j, k, xs[v], ys[v]);
          if (!started[v] || val < g[v]) g[v] = val;
          started[v] = true;
        }
      }
  for (int v = 0; v < m; ++v)
    if (!started[v]) g[v] = zs[v];
  return g;
}

// Least-norm element of {g : g . d_v >= b_v for all v} by cyclic Dykstra
// projections; the set is a nonempty polyhedron for every contact point.
inline Point least_norm_point(const std::vector<Point>& dirs,
                              const std::vector<double>& offs) {
  Point g{0.0, 0.0};
  std::vector<Point> corr(dirs.size(), Point{0.0, 0.0});
  for (int sweep = 0; sweep < 500; ++sweep) {
    double moved = 0.0;
    for (std::size_t v = 0; v < dirs.size(); ++v) {
      double px = g[0] + corr[v][0], py = g[1] + corr[v][1];
      double dd = dirs[v][0] * dirs[v][0] + dirs[v][1] * dirs[v][1];
      if (dd == 0.0) continue;
      double viol = offs[v] - (px * dirs[v][0] + py * dirs[v][1]);
      double nx = px, ny = py;
      if (viol > 0.0) {
        nx += viol * dirs[v][0] / dd;
        ny += viol * dirs[v][1] / dd;
      }
      corr[v] = {px - nx, py - ny};
      moved = std::max({moved, std::abs(nx - g[0]), std::abs(ny - g[1])});
      g = {nx, ny};
    }
    if (moved < 1e-14) break;
  }
  return g;
}

}  // namespace envelope_detail

inline EnvelopeResult concave_envelope(const FieldFunction& u,
                                       double eps_factor = 1e-9) {
  if (u.analytic) throw InvalidGrid("concave envelope needs a grid field");
  const int n = u.n_side;
  const int m = u.dim == 1 ? n : n * n;
  std::vector<double> xs(m), ys(m), zs(m);
  for (int v = 0; v < m; ++v) {
    Point p = x_of_node(u, v);
    xs[v] = p[0];
    ys[v] = p[1];
    zs[v] = std::max(u.scale * u.grid_value(u.dim == 1 ? v : v % n, v / n),
                     0.0);
  }
  double zmin = zs[0], zmax = zs[0];
  for (double z : zs) {
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
  }

  EnvelopeResult res;
  res.eps_contact = eps_factor * (zmax - zmin);
  res.gamma.assign(m, 0.0);

  if (zmax == zmin) {
    res.gamma = zs;
  } else if (u.dim == 1) {
    std::vector<int> chain = envelope_detail::upper_chain(xs, zs);
    std::size_t seg = 0;
    for (int v = 0; v < m; ++v) {
      while (seg + 2 < chain.size() && chain[seg + 1] <= v) ++seg;
      res.gamma[v] =
          envelope_detail::line_eval(xs, zs, chain[seg], chain[seg + 1], xs[v]);
    }
  } else {
    // corner-first insertion order keeps later points horizontally inside
    std::vector<int> order{0, n - 1, n * (n - 1), n * n - 1};
    for (int v = 0; v < m; ++v)
      if (v != 0 && v != n - 1 && v != n * (n - 1) && v != n * n - 1)
        order.push_back(v);
    std::vector<envelope_detail::Face> facets;
    bool ok = envelope_detail::upper_facets(xs, ys, zs, order, facets);
    if (ok) {
      for (int v = 0; v < m; ++v) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : facets) {
          int a = f.a, b = f.b, c = f.c;
          if (a > b) std::swap(a, b);
          if (b > c) std::swap(b, c);
          if (a > b) std::swap(a, b);
          double val = envelope_detail::plane_eval(xs, ys, zs, a, b, c,
                                                   xs[v], ys[v]);
          if (val < best) best = val;
        }
        res.gamma[v] = best;
      }
      // a broken hull shows up as a vertex poking above its envelope
      for (int v = 0; v < m && ok; ++v)
        ok = res.gamma[v] >= zs[v] - 1e-9 * (1.0 + zmax - zmin);
    }
    if (!ok) res.gamma = envelope_detail::envelope_by_planes(xs, ys, zs);
  }

  // contact set: interior nodes only
  const double hh = u.h();
  for (int v = 0; v < m; ++v) {
    bool interior;
    if (u.dim == 1) {
      interior = v > 0 && v + 1 < n;
    } else {
      int i = v % n, j = v / n;
      interior = i > 0 && i + 1 < n && j > 0 && j + 1 < n;
    }
    if (!interior) continue;
    if (std::abs(res.gamma[v] - zs[v]) > res.eps_contact) continue;
    res.contact.push_back(v);
    if (u.dim == 1) {
      double dl = (res.gamma[v] - res.gamma[v - 1]) / hh;   // left slope
      double dr = (res.gamma[v + 1] - res.gamma[v]) / hh;   // right slope
      double g = 0.0;  // superdifferential is [dr, dl]
      if (dr > 0.0)
        g = dr;
      else if (dl < 0.0)
        g = dl;
      res.supergradients.push_back({g, 0.0});
    } else {
      std::vector<Point> dirs;
      std::vector<double> offs;
      for (int w = 0; w < m; ++w) {
        if (w == v) continue;
        dirs.push_back({xs[w] - xs[v], ys[w] - ys[v]});
        offs.push_back(res.gamma[w] - res.gamma[v]);
      }
      res.supergradients.push_back(envelope_detail::least_norm_point(dirs,
                                                                     offs));
    }
  }
  return res;
}

// r_k = rho0 2^{-1/(2(2-sigma)) - k} R, the dyadic ABP ring radii.
inline std::vector<double> abp_ring_radii(double R, double rho0, double sigma,
                                          int k_max) {
  if (!(R > 0.0 && R < 1.0) || !(rho0 > 0.0 && rho0 < 1.0) ||
      !(sigma > 0.0 && sigma < 2.0) || k_max < 0)
    throw DomainError("abp_ring_radii parameter out of range");
  std::vector<double> r;
  for (int k = 0; k <= k_max; ++k)
    r.push_back(rho0 * std::exp2(-1.0 / (2.0 * (2.0 - sigma)) - k) * R);
  return r;
}

struct AbpReport {
  int k_found = -1;        // first ring index attaining the best ratio
  double fraction = 0.0;   // measured drop fraction on that ring
  double bound = 0.0;      // right-hand bound with c_n = 1
  double required_cn = 1.0;  // smallest c_n >= 1 making the check pass
};

// Ring measure estimate for the contact-point drop inequality.  The drop
// fraction is sampled from the field's interpolant (ring radii fall below
// any fixed grid spacing as sigma -> 2, so node counting cannot resolve
// them); the bound carries C~ = (c_n a0/(lambda rho0^4)) sup_s
// (1-2^{-2(2-s)})/(2-s) with sup 2 ln 2 and c_n = 1.
inline AbpReport abp_measure_check(const FieldFunction& u,
                                   const FieldFunction& f,
                                   const KernelClass& cls, const Point& x,
                                   const EnvelopeResult& env, double M,
                                   double rho0, int k_max = 8,
                                   int samples = 512) {
  if (u.analytic) throw InvalidGrid("abp check needs a grid field");
  if (!(M > 0.0)) throw DomainError("M must be positive");
  // locate and verify the contact node
  const double hh = u.h();
  int node = -1;
  Point grad{0.0, 0.0};
  for (std::size_t c = 0; c < env.contact.size(); ++c) {
    Point p = x_of_node(u, env.contact[c]);
    if (std::abs(p[0] - x[0]) <= 1e-12 && std::abs(p[1] - x[1]) <= 1e-12) {
      node = env.contact[c];
      grad = env.supergradients[c];
      break;
    }
  }
  if (node < 0) throw NoContactPoint("x is not on the computed contact set");
  (void)hh;

  const double R = u.radius / 3.0;  // the grid covers B_{3R}
  const ProfileBounds pb = profile_bounds(cls.profile);
  const double Ctilde = pb.a0 / (cls.lambda * rho0 * rho0 * rho0 * rho0) *
                        (2.0 * std::log(2.0));
  AbpReport rep;
  rep.bound = Ctilde / (eval_l(cls.profile, R) * R * R) * (f(x) / M);

  std::vector<double> radii = abp_ring_radii(R, rho0, cls.profile.sigma,
                                             k_max + 1);
  const double ux = u(x);
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= k_max; ++k) {
    const double r_out = radii[k], r_in = radii[k + 1];
    double drop = 0.0, total = 0.0;
    auto visit = [&](const Point& y, double wgt) {
      total += wgt;
      double aff = ux + grad[0] * (y[0] - x[0]) + grad[1] * (y[1] - x[1]);
      if (u(y) < aff - M * r_out * r_out) drop += wgt;
    };
    if (u.dim == 1) {
      for (int s = 0; s < samples; ++s) {
        double r = r_in + (r_out - r_in) * (s + 0.5) / samples;
        visit({x[0] + r, 0.0}, 1.0);
        visit({x[0] - r, 0.0}, 1.0);
      }
    } else {
      const int nr = 64, na = 64;
      for (int s = 0; s < nr; ++s) {
        double r = r_in + (r_out - r_in) * (s + 0.5) / nr;
        for (int a = 0; a < na; ++a) {
          double th = 2.0 * M_PI * (a + 0.5) / na;
          visit({x[0] + r * std::cos(th), x[1] + r * std::sin(th)}, r);
        }
      }
    }
    double frac = drop / total;
    double ratio = rep.bound > 0.0
                       ? frac / rep.bound
                       : (frac == 0.0 ? 0.0
                                      : std::numeric_limits<double>::infinity());
    if (ratio < best_ratio) {
      best_ratio = ratio;
      rep.k_found = k;
      rep.fraction = frac;
    }
    if (ratio <= 1.0) break;  // first certifying ring
  }
  rep.required_cn = std::max(1.0, best_ratio);
  return rep;
}

}  // namespace rvk

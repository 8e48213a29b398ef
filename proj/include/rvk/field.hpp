#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rvk/errors.hpp"
#include "rvk/kernels.hpp"

namespace rvk {

// A bounded scalar field on R^n (n = 1 or 2).  Either fully analytic
// (the rule applies everywhere) or grid-backed: multilinear interpolation
// on a uniform grid over the cube [center - radius, center + radius]^n,
// with the rule serving as far-field datum outside the cube.
struct FieldFunction {
  int dim = 1;
  std::function<double(const Point&)> rule;
  double bound = 0.0;  // a finite bound on sup |u| of the unscaled field
  double scale = 1.0;  // exact scalar multiplier applied after evaluation
  bool analytic = true;

  Point center{0.0, 0.0};
  double radius = 0.0;
  int n_side = 0;
  std::vector<double> values;

  std::optional<double> c11_modulus;   // |u(x+y)+u(x-y)-2u(x)| <= 2 M |y|^2
  std::optional<double> far_constant;  // set when the far field is constant

  double h() const { return 2.0 * radius / (n_side - 1); }

  bool inside_grid(const Point& x) const {
    if (analytic) return false;
    for (int d = 0; d < dim; ++d)
      if (std::abs(x[d] - center[d]) > radius) return false;
    return true;
  }

  double grid_value(int i, int j = 0) const {
    return dim == 1 ? values[(std::size_t)i]
                    : values[(std::size_t)j * n_side + i];
  }

  double sup_bound() const { return std::abs(scale) * bound; }

  // Scalar multiple sharing the underlying samples; second differences of
  // the result are exact multiples of those of *this.
  FieldFunction scaled(double c) const {
    FieldFunction f = *this;
    f.scale *= c;
    return f;
  }

  double eval_raw(const Point& x) const {
    if (analytic || !inside_grid(x)) return rule(x);
    const double hh = h();
    auto locate = [&](int d) {
      double t = (x[d] - (center[d] - radius)) / hh;
      int i = (int)std::floor(t);
      i = std::max(0, std::min(i, n_side - 2));
      return std::pair<int, double>{i, std::min(std::max(t - i, 0.0), 1.0)};
    };
    auto [i, tx] = locate(0);
    if (dim == 1)
      return (1.0 - tx) * grid_value(i) + tx * grid_value(i + 1);
    auto [j, ty] = locate(1);
    return (1.0 - tx) * (1.0 - ty) * grid_value(i, j) +
           tx * (1.0 - ty) * grid_value(i + 1, j) +
           (1.0 - tx) * ty * grid_value(i, j + 1) +
           tx * ty * grid_value(i + 1, j + 1);
  }

  double eval(const Point& x) const { return scale * eval_raw(x); }

  double operator()(const Point& x) const { return eval(x); }

  static FieldFunction make_analytic(
      int dim, std::function<double(const Point&)> rule, double bound,
      std::optional<double> c11 = std::nullopt) {
    if (dim != 1 && dim != 2)
      throw InvalidProfile("only dimensions 1 and 2 are supported");
    if (!std::isfinite(bound) || bound < 0.0)
      throw UnboundedField("field needs a finite sup bound");
    FieldFunction f;
    f.dim = dim;
    f.rule = std::move(rule);
    f.bound = bound;
    f.analytic = true;
    f.c11_modulus = c11;
    return f;
  }

  static FieldFunction make_grid(
      int dim, Point center, double radius, int n_side,
      std::vector<double> values, std::function<double(const Point&)> far,
      double bound, std::optional<double> c11 = std::nullopt,
      std::optional<double> far_const = std::nullopt) {
    if (dim != 1 && dim != 2)
      throw InvalidProfile("only dimensions 1 and 2 are supported");
    if (n_side < 2 || !(radius > 0.0))
      throw InvalidGrid("grid needs n_side >= 2 and radius > 0");
    std::size_t expect = dim == 1 ? (std::size_t)n_side
                                  : (std::size_t)n_side * n_side;
    if (values.size() != expect) throw InvalidGrid("grid value count mismatch");
    if (!std::isfinite(bound) || bound < 0.0)
      throw UnboundedField("field needs a finite sup bound");
    FieldFunction f;
    f.dim = dim;
    f.center = center;
    f.radius = radius;
    f.n_side = n_side;
    f.values = std::move(values);
    f.rule = std::move(far);
    f.bound = bound;
    f.analytic = false;
    f.c11_modulus = c11;
    f.far_constant = far_const;
    if (far_const) f.rule = [c = *far_const](const Point&) { return c; };
    return f;
  }
};

inline double second_difference(const FieldFunction& u, const Point& x,
                                const Point& y) {
  Point xp{x[0] + y[0], x[1] + y[1]};
  Point xm{x[0] - y[0], x[1] - y[1]};
  return u.scale * (u.eval_raw(xp) + u.eval_raw(xm) - 2.0 * u.eval_raw(x));
}

}  // namespace rvk

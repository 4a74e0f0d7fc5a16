#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lodens::quad {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth)
{
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

inline std::vector<double> pieces(double a, double b,
                                  std::span<const double> breaks)
{
  std::vector<double> nodes{a};
  for (double x : breaks)
    if (x > a && x < b)
      nodes.push_back(x);
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

} // namespace detail

//! Adaptive Simpson quadrature with an absolute tolerance.
template <class F>
double simpson(const F& f, double a, double b, double abs_tol,
               int max_depth = 50)
{
  if (!(b > a))
    return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol,
                              max_depth);
}

//! Integrates f over [a, b] to relative tolerance `rel_tol`.
//!
//! Points in `breaks` (kinks or support edges of f) split the range so the
//! integrand is smooth on every piece. The absolute tolerance is derived from
//! a composite Simpson estimate of the integral of |f|.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol,
                 std::span<const double> breaks = {})
{
  if (!(b > a))
    return 0.0;
  const auto nodes = detail::pieces(a, b, breaks);

  constexpr int coarse = 32;
  double scale = 0.0;
  for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
    const double lo = nodes[p], hi = nodes[p + 1];
    const double step = (hi - lo) / coarse;
    double acc = std::fabs(f(lo)) + std::fabs(f(hi));
    for (int k = 1; k < coarse; ++k)
      acc += (k % 2 ? 4.0 : 2.0) * std::fabs(f(lo + k * step));
    scale += acc * step / 3.0;
  }
  if (scale == 0.0)
    return 0.0;

  const double abs_tol = rel_tol * scale;
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
    const double lo = nodes[p], hi = nodes[p + 1];
    total += simpson(f, lo, hi, abs_tol * (hi - lo) / (b - a));
  }
  return total;
}

//! Iterated adaptive quadrature over an axis-aligned box.
//!
//! `f` receives a span holding the current point. `breaks[i]` lists the
//! kink locations along axis i (may be empty).
template <class F>
double integrate_box(const F& f, std::span<const double> lower,
                     std::span<const double> upper, double rel_tol,
                     const std::vector<std::vector<double>>& breaks = {})
{
  const std::size_t d = lower.size();
  if (upper.size() != d)
    throw std::invalid_argument("integrate_box: bound dimension mismatch");
  std::vector<double> point(d, 0.0);

  auto axis_breaks = [&](std::size_t axis) -> std::span<const double> {
    if (axis < breaks.size())
      return breaks[axis];
    return {};
  };

  // innermost axis is d-1; recursion runs from axis 0 outward-in
  auto inner = [&](auto&& self, std::size_t axis) -> double {
    auto slice = [&](double x) {
      point[axis] = x;
      if (axis + 1 == d)
        return f(std::span<const double>(point));
      return self(self, axis + 1);
    };
    // inner slices are resolved tighter so the outer integrand stays smooth
    const double tol = axis == 0 ? rel_tol : 0.1 * rel_tol;
    return integrate(slice, lower[axis], upper[axis], tol, axis_breaks(axis));
  };
  if (d == 0)
    return f(std::span<const double>(point));
  return inner(inner, 0);
}

} // namespace lodens::quad

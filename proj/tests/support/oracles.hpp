#pragma once

// Independent numeric oracles used to cross-check closed-form results. These
// integrate and differentiate the defining formulas directly and never call
// the implementation paths they verify.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "saaf/breakgrid.hpp"

namespace oracles {

/// Composite Simpson on [a, b] with n subintervals (n made even). Endpoint
/// samples are nudged inward so half-open indicators keep their interior
/// value on the panel boundary.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  const double nudge = h * 1e-9;
  double sum = f(a + nudge) + f(b - nudge);
  for (int i = 1; i < n; ++i) {
    sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

/// Integrates f from 0 to x, splitting at the given knots so each Simpson
/// panel sees a smooth integrand. Signed like the Riemann integral.
inline double integrate_from_zero(const std::function<double(double)>& f, double x,
                                  const std::vector<double>& knots, int panels_per_piece = 8) {
  if (x == 0.0) return 0.0;
  const double lo = std::min(0.0, x);
  const double hi = std::max(0.0, x);
  std::vector<double> cuts{lo, hi};
  for (double k : knots) {
    if (k > lo && k < hi) cuts.push_back(k);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += simpson(f, cuts[i], cuts[i + 1], 2 * panels_per_piece);
  }
  return x < 0.0 ? -total : total;
}

/// b_k^c by iterated numeric integration of the boxcar indicator.
inline double basis_by_quadrature(const saaf::BreakGrid& grid, int k, int degree, double x) {
  const double ak = grid.break_at(k);
  const double ak1 = grid.break_at(k + 1);
  std::function<double(double)> boxcar = [ak, ak1](double t) {
    return (ak <= t && t < ak1) ? 1.0 : 0.0;
  };
  const std::vector<double> knots{ak, ak1};
  if (degree == 0) return boxcar(x);
  std::function<double(double)> level = boxcar;
  for (int c = 1; c < degree; ++c) {
    std::function<double(double)> lower = level;
    level = [lower, knots](double t) { return integrate_from_zero(lower, t, knots); };
  }
  return integrate_from_zero(level, x, knots);
}

/// Central finite difference.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// True when |got - want| <= abs_tol + rel_tol * max(|got|, |want|); the
/// absolute floor absorbs finite-difference cancellation noise near zero.
inline bool close(double got, double want, double rel_tol, double abs_tol = 1e-9) {
  return std::abs(got - want) <= abs_tol + rel_tol * std::max(std::abs(got), std::abs(want));
}

}  // namespace oracles

#include "saaf/basis.hpp"

#include <cmath>
#include <string>

#include "saaf/errors.hpp"

namespace saaf {

namespace {

void check_segment_index(const BreakGrid& grid, int k) {
  if (k < 0 || k >= grid.segments()) {
    throw UsageError("segment index " + std::to_string(k) + " out of range [0, " +
                     std::to_string(grid.segments()) + ")");
  }
}

// (x - a)_+^c for c >= 1.
double trunc_pow(double x, double a, int c) {
  const double d = x - a;
  if (d <= 0.0) return 0.0;
  double r = d;
  for (int i = 1; i < c; ++i) r *= d;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= static_cast<double>(i);
  return r;
}

// u_c(x) = [(x-a_k)_+^c - (x-a_{k+1})_+^c] / c!, the c-fold antiderivative of
// the boxcar that vanishes (with all lower derivatives) at -infinity.
double u(double x, double ak, double ak1, int c) {
  return (trunc_pow(x, ak, c) - trunc_pow(x, ak1, c)) / factorial(c);
}

}  // namespace

double poly_basis(int j, double x) {
  if (j < 0) throw UsageError("poly_basis needs j >= 0");
  if (j == 0) return 1.0;
  double r = x;
  for (int i = 2; i <= j; ++i) r *= x / static_cast<double>(i);
  return r;
}

double boxcar(const BreakGrid& grid, int k, double x) {
  check_segment_index(grid, k);
  return (grid.break_at(k) <= x && x < grid.break_at(k + 1)) ? 1.0 : 0.0;
}

double basis(const BreakGrid& grid, int k, int degree, double x) {
  if (degree < 0) throw UsageError("basis needs degree >= 0");
  if (degree == 0) return boxcar(grid, k, x);
  check_segment_index(grid, k);
  const double ak = grid.break_at(k);
  const double ak1 = grid.break_at(k + 1);
  // Subtracting the Taylor polynomial of u_c at 0 pins every derivative of
  // order 0..c-1 to zero at x = 0; u_c^{(j)} = u_{c-j}.
  double value = u(x, ak, ak1, degree);
  double xpow = 1.0;  // x^j / j!
  for (int j = 0; j < degree; ++j) {
    if (j > 0) xpow *= x / static_cast<double>(j);
    value -= u(0.0, ak, ak1, degree - j) * xpow;
  }
  return value;
}

}  // namespace saaf

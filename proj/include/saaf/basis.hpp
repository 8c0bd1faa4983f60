#pragma once

#include "saaf/breakgrid.hpp"

namespace saaf {

/// Polynomial basis term x^j / j!. Requires j >= 0.
double poly_basis(int j, double x);

/// Boxcar b_k^0: indicator of the half-open segment [a_k, a_{k+1}).
/// k is a 0-based segment index in [0, grid.segments()).
double boxcar(const BreakGrid& grid, int k, double x);

/// Segment basis b_k^c: the c-fold antiderivative of the boxcar whose
/// derivatives of order 0..c-1 all vanish at x = 0. Closed form built from
/// truncated powers (x-a)_+^c minus the degree-(c-1) Taylor polynomial at 0,
/// so it is exact for any grid position, including grids with negative
/// breaks. basis(grid, k, 0, x) is the boxcar itself.
double basis(const BreakGrid& grid, int k, int degree, double x);

}  // namespace saaf

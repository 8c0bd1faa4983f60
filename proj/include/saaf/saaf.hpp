#pragma once

#include <span>
#include <vector>

#include "saaf/breakgrid.hpp"

namespace saaf {

/// Piecewise-polynomial adaptive activation
///
///   f(x) = sum_j v_j x^j/j!  +  sum_k w_k b_k^c(x)
///
/// with fixed break points, one weight w_k setting the c-th derivative on
/// segment k, and c global polynomial weights v_0..v_{c-1}. Degrees 1
/// (piecewise linear) and 2 (piecewise quadratic) are the trained
/// configurations; degree 0 (a boxcar sum) is representable but rejected by
/// the training paths. Derivatives of order 0..c-1 are continuous
/// everywhere, including at break points.
///
/// Evaluation runs in O(log n): the active segment is found by binary search
/// and the saturated contribution of segments left of x comes from cached
/// prefix sums of w. Instances are immutable apart from set_params /
/// set_weights, which rebuild the cache; concurrent readers are safe.
class Saaf {
 public:
  /// Zero-initialized weights (f == 0).
  Saaf(int degree, BreakGrid grid);

  Saaf(int degree, BreakGrid grid, std::vector<double> w, std::vector<double> v);

  /// The identity function on the grid span: w = 1, v = 0 for degree 1;
  /// w = 0, v = (0, 1) for degree 2.
  static Saaf identity(int degree, BreakGrid grid);

  int degree() const { return degree_; }
  const BreakGrid& grid() const { return grid_; }
  std::span<const double> w() const { return w_; }
  std::span<const double> v() const { return v_; }

  /// Number of trainable parameters, n + c.
  int param_count() const { return static_cast<int>(w_.size() + v_.size()); }

  /// f(x). Defined on all of R; outside the grid the basis functions extend
  /// naturally (constant for c=1, linear for c=2).
  double operator()(double x) const;

  /// f'(x). Requires degree >= 1. For c=1 the derivative jumps at break
  /// points; the value of the right limit is returned there.
  double derivative(double x) const;

  /// f''(x) (almost-everywhere value; right limit at break points).
  /// Requires degree >= 2.
  double second_derivative(double x) const;

  /// d f(x) / d w_k = b_k^c(x) and d f(x) / d v_j = x^j/j!.
  /// grad_w must have size n, grad_v size c.
  void param_grads(double x, std::span<double> grad_w, std::span<double> grad_v) const;

  /// Flat parameter layout [w_0..w_{n-1}, v_0..v_{c-1}].
  void get_params(std::span<double> out) const;
  void set_params(std::span<const double> in);

  void set_weights(std::vector<double> w, std::vector<double> v);

  bool operator==(const Saaf& other) const;

 private:
  void rebuild_cache();
  // Integral of the piecewise-constant weight function from the first break:
  // wint(t) = int_{a_0}^{t} sum_k w_k b_k^0.
  double weight_integral(double t) const;
  // Second-level integral int_{a_0}^{t} wint.
  double weight_integral2(double t) const;

  int degree_;
  BreakGrid grid_;
  std::vector<double> w_;
  std::vector<double> v_;
  // cum_mass_[i] = wint(a_i); cum_int_[i] = weight_integral2(a_i).
  std::vector<double> cum_mass_;
  std::vector<double> cum_int_;
  double wint_at_zero_ = 0.0;
  double wint2_at_zero_ = 0.0;
};

}  // namespace saaf

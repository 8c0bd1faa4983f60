#include "saaf/saaf.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "saaf/basis.hpp"
#include "saaf/errors.hpp"

namespace saaf {

Saaf::Saaf(int degree, BreakGrid grid)
    : Saaf(degree, std::move(grid), {}, {}) {}

Saaf::Saaf(int degree, BreakGrid grid, std::vector<double> w, std::vector<double> v)
    : degree_(degree), grid_(std::move(grid)), w_(std::move(w)), v_(std::move(v)) {
  if (degree_ < 0 || degree_ > 2) {
    throw UsageError("Saaf supports degree 0, 1 or 2; got " + std::to_string(degree_));
  }
  const auto n = static_cast<std::size_t>(grid_.segments());
  if (w_.empty()) w_.assign(n, 0.0);
  if (v_.empty()) v_.assign(static_cast<std::size_t>(degree_), 0.0);
  if (w_.size() != n) {
    throw UsageError("Saaf needs one segment weight per segment");
  }
  if (v_.size() != static_cast<std::size_t>(degree_)) {
    throw UsageError("Saaf needs exactly c polynomial weights");
  }
  rebuild_cache();
}

Saaf Saaf::identity(int degree, BreakGrid grid) {
  const auto n = static_cast<std::size_t>(grid.segments());
  if (degree == 1) {
    return Saaf(1, std::move(grid), std::vector<double>(n, 1.0), {0.0});
  }
  if (degree == 2) {
    return Saaf(2, std::move(grid), std::vector<double>(n, 0.0), {0.0, 1.0});
  }
  throw UsageError("identity initialization needs degree 1 or 2");
}

void Saaf::rebuild_cache() {
  const int n = grid_.segments();
  cum_mass_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  cum_int_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    const double h = grid_.break_at(k + 1) - grid_.break_at(k);
    cum_mass_[k + 1] = cum_mass_[k] + w_[static_cast<std::size_t>(k)] * h;
    // int over segment k of (cum_mass_[k] + w_k (t - a_k)) dt
    cum_int_[k + 1] = cum_int_[k] + cum_mass_[k] * h + 0.5 * w_[static_cast<std::size_t>(k)] * h * h;
  }
  wint_at_zero_ = weight_integral(0.0);
  wint2_at_zero_ = weight_integral2(0.0);
}

double Saaf::weight_integral(double t) const {
  if (t <= grid_.lower()) return 0.0;
  if (t >= grid_.upper()) return cum_mass_.back();
  const int s = grid_.locate(t);
  return cum_mass_[s] + w_[static_cast<std::size_t>(s)] * (t - grid_.break_at(s));
}

double Saaf::weight_integral2(double t) const {
  if (t <= grid_.lower()) return 0.0;
  if (t >= grid_.upper()) {
    return cum_int_.back() + cum_mass_.back() * (t - grid_.upper());
  }
  const int s = grid_.locate(t);
  const double d = t - grid_.break_at(s);
  return cum_int_[s] + cum_mass_[s] * d + 0.5 * w_[static_cast<std::size_t>(s)] * d * d;
}

double Saaf::operator()(double x) const {
  switch (degree_) {
    case 0: {
      const int s = grid_.locate(x);
      return (s >= 0 && s < grid_.segments()) ? w_[static_cast<std::size_t>(s)] : 0.0;
    }
    case 1:
      // sum_k w_k b_k^1(x) = int_0^x w(t) dt
      return v_[0] + weight_integral(x) - wint_at_zero_;
    default:
      // sum_k w_k b_k^2(x) = int_0^x (wint(t) - wint(0)) dt
      return v_[0] + v_[1] * x + weight_integral2(x) - wint2_at_zero_ - wint_at_zero_ * x;
  }
}

double Saaf::derivative(double x) const {
  if (degree_ < 1) {
    throw UsageError("derivative needs degree >= 1");
  }
  if (degree_ == 1) {
    const int s = grid_.locate(x);
    return (s >= 0 && s < grid_.segments()) ? w_[static_cast<std::size_t>(s)] : 0.0;
  }
  return v_[1] + weight_integral(x) - wint_at_zero_;
}

double Saaf::second_derivative(double x) const {
  if (degree_ < 2) {
    throw UsageError("second_derivative needs degree >= 2");
  }
  const int s = grid_.locate(x);
  return (s >= 0 && s < grid_.segments()) ? w_[static_cast<std::size_t>(s)] : 0.0;
}

void Saaf::param_grads(double x, std::span<double> grad_w, std::span<double> grad_v) const {
  if (grad_w.size() != w_.size() || grad_v.size() != v_.size()) {
    throw UsageError("param_grads output spans have wrong size");
  }
  for (int k = 0; k < grid_.segments(); ++k) {
    grad_w[static_cast<std::size_t>(k)] = basis(grid_, k, degree_, x);
  }
  for (int j = 0; j < degree_; ++j) {
    grad_v[static_cast<std::size_t>(j)] = poly_basis(j, x);
  }
}

void Saaf::get_params(std::span<double> out) const {
  if (out.size() != w_.size() + v_.size()) {
    throw UsageError("get_params span has wrong size");
  }
  std::copy(w_.begin(), w_.end(), out.begin());
  std::copy(v_.begin(), v_.end(), out.begin() + static_cast<std::ptrdiff_t>(w_.size()));
}

void Saaf::set_params(std::span<const double> in) {
  if (in.size() != w_.size() + v_.size()) {
    throw UsageError("set_params span has wrong size");
  }
  std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(w_.size()), w_.begin());
  std::copy(in.begin() + static_cast<std::ptrdiff_t>(w_.size()), in.end(), v_.begin());
  rebuild_cache();
}

void Saaf::set_weights(std::vector<double> w, std::vector<double> v) {
  if (w.size() != w_.size() || v.size() != v_.size()) {
    throw UsageError("set_weights arguments have wrong size");
  }
  w_ = std::move(w);
  v_ = std::move(v);
  rebuild_cache();
}

bool Saaf::operator==(const Saaf& other) const {
  return degree_ == other.degree_ && grid_ == other.grid_ && w_ == other.w_ && v_ == other.v_;
}

}  // namespace saaf

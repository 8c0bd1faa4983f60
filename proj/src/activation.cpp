#include "saaf/activation.hpp"

#include <algorithm>
#include <cmath>

#include "saaf/errors.hpp"

namespace saaf {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace

APLU make_aplu(int segments, double lo, double hi) {
  if (segments < 1) throw UsageError("APLU needs at least one segment");
  if (!(lo < hi)) throw UsageError("APLU hinge range needs lo < hi");
  APLU a;
  a.slopes.assign(static_cast<std::size_t>(segments), 0.0);
  a.breaks.resize(static_cast<std::size_t>(segments));
  // interior points of an even partition of [lo, hi]
  for (int s = 0; s < segments; ++s) {
    a.breaks[static_cast<std::size_t>(s)] =
        lo + (hi - lo) * (static_cast<double>(s + 1) / static_cast<double>(segments + 1));
  }
  return a;
}

double activation_eval(const Activation& a, double x) {
  return std::visit(
      Overload{
          [&](const ReLU&) { return std::max(0.0, x); },
          [&](const LReLU& f) { return x >= 0.0 ? x : f.slope * x; },
          [&](const PReLU& f) { return x >= 0.0 ? x : f.slope * x; },
          [&](const APLU& f) {
            double y = std::max(0.0, x);
            for (std::size_t s = 0; s < f.slopes.size(); ++s) {
              y += f.slopes[s] * std::max(0.0, f.breaks[s] - x);
            }
            return y;
          },
          [&](const Saaf& f) { return f(x); },
      },
      a);
}

double activation_deriv(const Activation& a, double x) {
  return std::visit(
      Overload{
          [&](const ReLU&) { return x >= 0.0 ? 1.0 : 0.0; },
          [&](const LReLU& f) { return x >= 0.0 ? 1.0 : f.slope; },
          [&](const PReLU& f) { return x >= 0.0 ? 1.0 : f.slope; },
          [&](const APLU& f) {
            double d = x >= 0.0 ? 1.0 : 0.0;
            for (std::size_t s = 0; s < f.slopes.size(); ++s) {
              if (x < f.breaks[s]) d -= f.slopes[s];
            }
            return d;
          },
          [&](const Saaf& f) { return f.derivative(x); },
      },
      a);
}

int activation_param_count(const Activation& a) {
  return std::visit(Overload{
                        [](const ReLU&) { return 0; },
                        [](const LReLU&) { return 0; },
                        [](const PReLU&) { return 1; },
                        [](const APLU& f) { return static_cast<int>(2 * f.slopes.size()); },
                        [](const Saaf& f) { return f.param_count(); },
                    },
                    a);
}

void activation_param_grads(const Activation& a, double x, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(activation_param_count(a))) {
    throw UsageError("activation_param_grads span has wrong size");
  }
  std::visit(Overload{
                 [&](const ReLU&) {},
                 [&](const LReLU&) {},
                 [&](const PReLU&) { out[0] = x >= 0.0 ? 0.0 : x; },
                 [&](const APLU& f) {
                   const std::size_t n = f.slopes.size();
                   for (std::size_t s = 0; s < n; ++s) {
                     out[s] = std::max(0.0, f.breaks[s] - x);
                     out[n + s] = x < f.breaks[s] ? f.slopes[s] : 0.0;
                   }
                 },
                 [&](const Saaf& f) {
                   const std::size_t nw = f.w().size();
                   f.param_grads(x, out.subspan(0, nw), out.subspan(nw));
                 },
             },
             a);
}

void activation_get_params(const Activation& a, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(activation_param_count(a))) {
    throw UsageError("activation_get_params span has wrong size");
  }
  std::visit(Overload{
                 [&](const ReLU&) {},
                 [&](const LReLU&) {},
                 [&](const PReLU& f) { out[0] = f.slope; },
                 [&](const APLU& f) {
                   const std::size_t n = f.slopes.size();
                   std::copy(f.slopes.begin(), f.slopes.end(), out.begin());
                   std::copy(f.breaks.begin(), f.breaks.end(), out.begin() + static_cast<std::ptrdiff_t>(n));
                 },
                 [&](const Saaf& f) { f.get_params(out); },
             },
             a);
}

void activation_set_params(Activation& a, std::span<const double> in) {
  if (in.size() != static_cast<std::size_t>(activation_param_count(a))) {
    throw UsageError("activation_set_params span has wrong size");
  }
  std::visit(Overload{
                 [&](ReLU&) {},
                 [&](LReLU&) {},
                 [&](PReLU& f) { f.slope = in[0]; },
                 [&](APLU& f) {
                   const std::size_t n = f.slopes.size();
                   std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(n), f.slopes.begin());
                   std::copy(in.begin() + static_cast<std::ptrdiff_t>(n), in.end(), f.breaks.begin());
                 },
                 [&](Saaf& f) { f.set_params(in); },
             },
             a);
}

std::string activation_param_name(const Activation& a, int index) {
  if (index < 0 || index >= activation_param_count(a)) {
    throw UsageError("activation parameter index out of range");
  }
  return std::visit(
      Overload{
          [&](const ReLU&) { return std::string(); },
          [&](const LReLU&) { return std::string(); },
          [&](const PReLU&) { return std::string("slope"); },
          [&](const APLU& f) {
            const int n = static_cast<int>(f.slopes.size());
            return index < n ? "slope[" + std::to_string(index) + "]"
                             : "break[" + std::to_string(index - n) + "]";
          },
          [&](const Saaf& f) {
            const int nw = static_cast<int>(f.w().size());
            return index < nw ? "w[" + std::to_string(index) + "]"
                              : "v[" + std::to_string(index - nw) + "]";
          },
      },
      a);
}

ActivationSpec parse_activation_name(std::string_view name) {
  ActivationSpec spec;
  std::string_view base = name;
  if (base.rfind("R-", 0) == 0) {
    spec.regression_only = true;
    base = base.substr(2);
  }
  if (base == "ReLU") {
    spec.kind = ActivationSpec::Kind::ReLU;
    spec.regression_only = false;  // R-ReLU is plain ReLU
  } else if (base == "LReLU") {
    spec.kind = ActivationSpec::Kind::LReLU;
  } else if (base == "PReLU") {
    spec.kind = ActivationSpec::Kind::PReLU;
  } else if (base == "APLU") {
    spec.kind = ActivationSpec::Kind::APLU;
  } else if (base == "SAAFc1") {
    spec.kind = ActivationSpec::Kind::SAAFc1;
  } else if (base == "SAAFc2") {
    spec.kind = ActivationSpec::Kind::SAAFc2;
  } else {
    throw UsageError("unknown activation name '" + std::string(name) +
                     "'; valid names: ReLU, LReLU, PReLU, APLU, SAAFc1, SAAFc2, "
                     "optionally prefixed with R-");
  }
  return spec;
}

std::string activation_spec_name(const ActivationSpec& spec) {
  std::string base;
  switch (spec.kind) {
    case ActivationSpec::Kind::ReLU: base = "ReLU"; break;
    case ActivationSpec::Kind::LReLU: base = "LReLU"; break;
    case ActivationSpec::Kind::PReLU: base = "PReLU"; break;
    case ActivationSpec::Kind::APLU: base = "APLU"; break;
    case ActivationSpec::Kind::SAAFc1: base = "SAAFc1"; break;
    case ActivationSpec::Kind::SAAFc2: base = "SAAFc2"; break;
  }
  return spec.regression_only ? "R-" + base : base;
}

Activation make_activation(ActivationSpec::Kind kind, const BreakGrid& grid) {
  switch (kind) {
    case ActivationSpec::Kind::ReLU: return ReLU{};
    case ActivationSpec::Kind::LReLU: return LReLU{};
    case ActivationSpec::Kind::PReLU: return PReLU{};
    case ActivationSpec::Kind::APLU:
      return make_aplu(kDefaultApluSegments, grid.lower(), grid.upper());
    case ActivationSpec::Kind::SAAFc1: return Saaf::identity(1, grid);
    case ActivationSpec::Kind::SAAFc2: return Saaf::identity(2, grid);
  }
  throw UsageError("unhandled activation kind");
}

std::string_view activation_kind_tag(const Activation& a) {
  return std::visit(Overload{
                        [](const ReLU&) { return std::string_view("relu"); },
                        [](const LReLU&) { return std::string_view("lrelu"); },
                        [](const PReLU&) { return std::string_view("prelu"); },
                        [](const APLU&) { return std::string_view("aplu"); },
                        [](const Saaf&) { return std::string_view("saaf"); },
                    },
                    a);
}

}  // namespace saaf

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "saaf/saaf.hpp"

namespace saaf {

// Default shape parameters for the baseline activations. The leaky slope is
// the signed value used throughout the experiments this library reproduces;
// it is configurable wherever an LReLU is constructed.
inline constexpr double kDefaultLReluSlope = -1.0 / 3.0;
inline constexpr double kDefaultPReluSlope = 0.25;
inline constexpr int kDefaultApluSegments = 5;

struct ReLU {
  bool operator==(const ReLU&) const = default;
};

/// Leaky ReLU with a slope fixed at construction (not trainable).
struct LReLU {
  double slope = kDefaultLReluSlope;
  bool operator==(const LReLU&) const = default;
};

/// Parametric ReLU; the negative-side slope is trainable.
struct PReLU {
  double slope = kDefaultPReluSlope;
  bool operator==(const PReLU&) const = default;
};

/// Adaptive piecewise linear unit
///   f(x) = max(0, x) + sum_s slopes[s] * max(0, breaks[s] - x)
/// with trainable slopes and hinge positions.
struct APLU {
  std::vector<double> slopes;
  std::vector<double> breaks;
  bool operator==(const APLU&) const = default;
};

/// Returns an APLU with `segments` hinges spread evenly over (lo, hi) and all
/// slopes zero, so it starts as a plain ReLU.
APLU make_aplu(int segments, double lo, double hi);

using Activation = std::variant<ReLU, LReLU, PReLU, APLU, Saaf>;

double activation_eval(const Activation& a, double x);

/// d f / d x with the right-limit convention at kinks and break points.
double activation_deriv(const Activation& a, double x);

/// Number of trainable shape parameters (0 for ReLU and LReLU).
int activation_param_count(const Activation& a);

/// d f(x) / d theta for the flat parameter layout:
///   PReLU: [slope]; APLU: [slopes..., breaks...]; Saaf: [w..., v...].
void activation_param_grads(const Activation& a, double x, std::span<double> out);

void activation_get_params(const Activation& a, std::span<double> out);
void activation_set_params(Activation& a, std::span<const double> in);

/// Parameter name for diagnostics, e.g. "w[3]", "slope", "break[1]".
std::string activation_param_name(const Activation& a, int index);

/// Activation selection as written in configs: base kind plus the R- prefix
/// restricting the adaptive activation to the regression layer.
struct ActivationSpec {
  enum class Kind { ReLU, LReLU, PReLU, APLU, SAAFc1, SAAFc2 };
  Kind kind = Kind::ReLU;
  bool regression_only = false;  // R- prefix
};

/// Parses names like "ReLU", "LReLU", "SAAFc2", "R-SAAFc1". Throws UsageError
/// listing the valid names otherwise. "R-ReLU" is accepted and equivalent to
/// "ReLU".
ActivationSpec parse_activation_name(std::string_view name);

std::string activation_spec_name(const ActivationSpec& spec);

/// Instantiates the template activation for one neuron. SAAF kinds start as
/// the identity on the given grid; APLU hinges are spread over the grid span.
Activation make_activation(ActivationSpec::Kind kind, const BreakGrid& grid);

/// Short kind tag used in serialized form: relu, lrelu, prelu, aplu, saaf.
std::string_view activation_kind_tag(const Activation& a);

}  // namespace saaf

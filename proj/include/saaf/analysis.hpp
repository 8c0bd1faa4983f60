#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "saaf/data.hpp"
#include "saaf/net.hpp"
#include "saaf/saaf.hpp"

namespace saaf {

/// Exact Lipschitz constant of a SAAF over [lo, hi], read off the parameters:
/// degree 1 gives max |w_k| over segments intersecting the domain; degree 2
/// maximizes the piecewise-linear derivative v_1 + int_0^x w over the break
/// points and domain endpoints. Degrees outside {1, 2} are rejected.
double lipschitz_saaf(const Saaf& f, double lo, double hi);

/// Lipschitz constant of any activation over [lo, hi] (right-limit slopes on
/// each linear region for the ReLU family and APLU).
double lipschitz_activation(const Activation& a, double lo, double hi);

/// Lipschitz constant over all of R. For SAAFs this equals the grid-span
/// value, since the derivative is constant beyond the outermost breaks.
double lipschitz_activation_global(const Activation& a);

/// Upper bound on the network Lipschitz constant: the product over layers of
/// spectral norm of W times the largest per-neuron activation constant
/// (times the normalization gain where batch normalization is enabled, using
/// running statistics), times ||h||_2. Conservative, not tight.
double lipschitz_network(const Network& net);

/// Spectral norm by power iteration (100 iterations, tolerance 1e-9,
/// deterministic start vector).
double spectral_norm(const Eigen::MatrixXd& m);

/// Axis-aligned box; one (lo, hi) pair per dimension.
struct Box {
  std::vector<std::pair<double, double>> bounds;

  static Box cube(int dims, double lo, double hi);
};

/// Largest sampled pairwise slope |f(x1) - f(x2)| / ||x1 - x2||; a lower
/// bound on the true Lipschitz constant, deterministic per seed. Pairs mix
/// independent uniform draws, random near-pairs, and a stratified sweep of
/// near-pairs so that every short segment of a one-dimensional domain is
/// probed.
double empirical_lipschitz(const std::function<double(std::span<const double>)>& fn,
                           const Box& box, int n_pairs, std::uint64_t seed);

/// One-dimensional convenience overload.
double empirical_lipschitz(const std::function<double(double)>& fn, double lo, double hi,
                           int n_pairs, std::uint64_t seed);

struct ComplexityQuery {
  int d = 1;          // input dimension
  double lipschitz = 1.0;
  double margin = 1.0;  // gamma
};

/// Fat-shattering upper bound d + L^d d! / (gamma^d sqrt(2^d (d+1))).
/// Evaluated in log space; returns +infinity past the representable range.
double fat_shattering_bound(const ComplexityQuery& q);

// ---------------------------------------------------------------------------
// Conditional-expectation diagnostic for the regression layer: compares each
// regression neuron's activation output f_i(x_i) with the binned conditional
// mean of the target given x_i. Offsets drop out through centering.
// ---------------------------------------------------------------------------

struct NeuronDiagnostic {
  std::vector<double> bin_centers;
  std::vector<double> mean_contribution;  // h_i * activation output, per occupied bin
  std::vector<double> mean_target;
  std::vector<int> bin_counts;
  std::optional<double> correlation;  // absent when inconclusive
};

struct DiagnosticReport {
  std::vector<NeuronDiagnostic> neurons;

  /// Mean correlation over conclusive neurons; absent when none are.
  std::optional<double> mean_correlation() const;
};

/// Bins the observed regression-layer pre-activations into `bins` equal-width
/// bins (occupied = at least `min_bin_count` samples) and correlates each
/// neuron's binned output contribution h_i * f_i with the binned target mean.
/// Neurons with fewer than two occupied bins, or with a degenerate series,
/// are inconclusive.
DiagnosticReport conditional_expectation_diagnostic(const Network& net, const Dataset& data,
                                                    int bins, int min_bin_count = 5);

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

struct ComplexityReport {
  std::vector<std::vector<double>> activation_lipschitz;  // per layer, per neuron
  double network_bound = 0.0;
  double empirical_estimate = 0.0;
  double margin = 0.0;
  double fat_shattering = 0.0;
  int input_dim = 0;
};

/// Computes the report over the given box (default the unit cube [-1, 1]^d).
/// Throws NumericError if the sampled estimate exceeds the analytic bound.
ComplexityReport analyze_network(const Network& net, double margin, int n_pairs,
                                 std::uint64_t seed, const Box* domain = nullptr);

}  // namespace saaf

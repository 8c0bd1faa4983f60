#include "saaf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "saaf/errors.hpp"
#include "saaf/rng.hpp"

namespace saaf {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace

double lipschitz_saaf(const Saaf& f, double lo, double hi) {
  if (f.degree() != 1 && f.degree() != 2) {
    throw UsageError("lipschitz_saaf supports degree 1 and 2");
  }
  if (!(lo < hi)) throw UsageError("lipschitz_saaf needs lo < hi");

  const BreakGrid& grid = f.grid();
  if (f.degree() == 1) {
    double best = 0.0;
    for (int k = 0; k < grid.segments(); ++k) {
      // segment [a_k, a_{k+1}) intersects [lo, hi]; at x == a_{k+1} the
      // derivative already belongs to the next segment
      if (grid.break_at(k) <= hi && lo < grid.break_at(k + 1)) {
        best = std::max(best, std::abs(f.w()[static_cast<std::size_t>(k)]));
      }
    }
    return best;
  }

  // degree 2: |f'| = |v_1 + int_0^x w| is piecewise linear, so the maximum
  // sits at a break point or a domain endpoint
  double best = std::max(std::abs(f.derivative(lo)), std::abs(f.derivative(hi)));
  for (double a : grid.breaks()) {
    if (a > lo && a < hi) best = std::max(best, std::abs(f.derivative(a)));
  }
  return best;
}

namespace {

double lipschitz_aplu(const APLU& f, double lo, double hi) {
  // derivative is constant between kinks; sample the right limit at each
  // candidate, plus the left end of the domain
  std::vector<double> candidates;
  candidates.push_back(lo);
  auto consider = [&](double k) {
    if (k > lo && k < hi) candidates.push_back(k);
  };
  consider(0.0);
  for (double b : f.breaks) consider(b);
  double best = 0.0;
  Activation a = f;
  for (double x : candidates) best = std::max(best, std::abs(activation_deriv(a, x)));
  return best;
}

}  // namespace

double lipschitz_activation(const Activation& a, double lo, double hi) {
  if (!(lo < hi)) throw UsageError("lipschitz_activation needs lo < hi");
  return std::visit(
      Overload{
          [&](const ReLU&) { return hi > 0.0 ? 1.0 : 0.0; },
          [&](const LReLU& f) {
            double best = 0.0;
            if (hi > 0.0) best = 1.0;
            if (lo < 0.0) best = std::max(best, std::abs(f.slope));
            return best;
          },
          [&](const PReLU& f) {
            double best = 0.0;
            if (hi > 0.0) best = 1.0;
            if (lo < 0.0) best = std::max(best, std::abs(f.slope));
            return best;
          },
          [&](const APLU& f) { return lipschitz_aplu(f, lo, hi); },
          [&](const Saaf& f) { return lipschitz_saaf(f, lo, hi); },
      },
      a);
}

double lipschitz_activation_global(const Activation& a) {
  return std::visit(
      Overload{
          [&](const ReLU&) { return 1.0; },
          [&](const LReLU& f) { return std::max(1.0, std::abs(f.slope)); },
          [&](const PReLU& f) { return std::max(1.0, std::abs(f.slope)); },
          [&](const APLU& f) {
            double lo = -1.0, hi = 1.0;
            for (double b : f.breaks) {
              lo = std::min(lo, b - 1.0);
              hi = std::max(hi, b + 1.0);
            }
            return lipschitz_aplu(f, std::min(lo, -1.0), std::max(hi, 1.0));
          },
          [&](const Saaf& f) {
            // the derivative is constant outside the grid, so the grid span
            // carries the global maximum
            return lipschitz_saaf(f, f.grid().lower(), f.grid().upper());
          },
      },
      a);
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::VectorXd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = 1.0 + 1e-3 * static_cast<double>(i);  // deterministic, not axis-aligned
  }
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd u = m * v;
    const double norm = u.norm();
    if (norm == 0.0) return 0.0;
    v = m.transpose() * (u / norm);
    const double next = v.norm();
    v /= next;
    if (std::abs(next - sigma) <= 1e-9 * std::max(1.0, next)) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma;
}

double lipschitz_network(const Network& net) {
  double bound = 1.0;
  for (const Layer& layer : net.layers) {
    bound *= spectral_norm(layer.W);
    if (layer.bn) {
      // inference-mode normalization is a diagonal affine map
      const Eigen::ArrayXd gain =
          layer.bn->gamma.array().abs() * (layer.bn->running_var.array() + layer.bn->eps).rsqrt();
      bound *= gain.maxCoeff();
    }
    double act_bound = 0.0;
    for (int j = 0; j < layer.width(); ++j) {
      act_bound = std::max(act_bound, lipschitz_activation_global(layer.act(j)));
    }
    bound *= act_bound;
  }
  return bound * net.h.norm();
}

Box Box::cube(int dims, double lo, double hi) {
  Box box;
  box.bounds.assign(static_cast<std::size_t>(dims), {lo, hi});
  return box;
}

double empirical_lipschitz(const std::function<double(std::span<const double>)>& fn,
                           const Box& box, int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw UsageError("empirical_lipschitz needs n_pairs >= 1");
  const auto dims = box.bounds.size();
  if (dims == 0) throw UsageError("empirical_lipschitz needs a non-empty box");
  for (const auto& [lo, hi] : box.bounds) {
    if (!(lo < hi)) throw UsageError("empirical_lipschitz box is degenerate");
  }

  Rng rng(seed);
  std::vector<double> x1(dims), x2(dims);
  const int n_sweep = n_pairs / 3 + 1;

  auto sample_uniform = [&](std::vector<double>& x) {
    for (std::size_t d = 0; d < dims; ++d) {
      x[d] = rng.uniform(box.bounds[d].first, box.bounds[d].second);
    }
  };
  auto random_direction = [&](std::vector<double>& dir) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        dir[d] = rng.normal();
        norm += dir[d] * dir[d];
      }
      norm = std::sqrt(norm);
    } while (norm == 0.0);
    for (std::size_t d = 0; d < dims; ++d) dir[d] /= norm;
  };

  std::vector<double> dir(dims);
  double best = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    switch (i % 3) {
      case 0:  // independent pair
        sample_uniform(x1);
        sample_uniform(x2);
        break;
      case 1: {  // random near-pair
        sample_uniform(x1);
        random_direction(dir);
        const double r = rng.uniform(0.5, 1.5) * 1e-5;
        for (std::size_t d = 0; d < dims; ++d) {
          const double span = box.bounds[d].second - box.bounds[d].first;
          x2[d] = x1[d] + r * span * dir[d];
          if (x2[d] < box.bounds[d].first || x2[d] > box.bounds[d].second) {
            x2[d] = x1[d] - r * span * dir[d];
          }
        }
        break;
      }
      default: {  // stratified sweep of near-pairs along the diagonal
        const int stratum = (i / 3) % n_sweep;
        const double jitter = rng.uniform();
        for (std::size_t d = 0; d < dims; ++d) {
          const auto [lo, hi] = box.bounds[d];
          const double stride = (hi - lo) / static_cast<double>(n_sweep);
          x1[d] = lo + (static_cast<double>(stratum) + 0.25 + 0.5 * jitter) * stride;
          x2[d] = x1[d] + 0.2 * stride;
          if (x2[d] > hi) x2[d] = x1[d] - 0.2 * stride;
        }
        break;
      }
    }
    double dist2 = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double dd = x1[d] - x2[d];
      dist2 += dd * dd;
    }
    if (dist2 == 0.0) continue;
    const double slope = std::abs(fn(x1) - fn(x2)) / std::sqrt(dist2);
    best = std::max(best, slope);
  }
  return best;
}

double empirical_lipschitz(const std::function<double(double)>& fn, double lo, double hi,
                           int n_pairs, std::uint64_t seed) {
  return empirical_lipschitz(
      [&fn](std::span<const double> x) { return fn(x[0]); }, Box::cube(1, lo, hi), n_pairs,
      seed);
}

double fat_shattering_bound(const ComplexityQuery& q) {
  if (q.d < 1 || !(q.lipschitz > 0.0) || !(q.margin > 0.0)) {
    throw UsageError("fat_shattering_bound needs d >= 1, L > 0, gamma > 0");
  }
  const double d = static_cast<double>(q.d);
  // log of L^d d! / (gamma^d sqrt(2^d (d+1)))
  const double log_term = d * std::log(q.lipschitz) + std::lgamma(d + 1.0) -
                          d * std::log(q.margin) -
                          0.5 * (d * std::numbers::ln2 + std::log(d + 1.0));
  if (log_term > std::log(std::numeric_limits<double>::max())) {
    return std::numeric_limits<double>::infinity();
  }
  return d + std::exp(log_term);
}

DiagnosticReport conditional_expectation_diagnostic(const Network& net, const Dataset& data,
                                                    int bins, int min_bin_count) {
  if (bins < 2) throw UsageError("diagnostic needs at least two bins");
  if (data.size() == 0) throw UsageError("diagnostic needs data");

  ForwardTrace trace;
  forward(net, data.X, &trace, false);
  const LayerTrace& reg = trace.layers.back();
  const Eigen::Index width = reg.act_in.cols();
  const Eigen::Index n = reg.act_in.rows();

  DiagnosticReport report;
  report.neurons.resize(static_cast<std::size_t>(width));

  for (Eigen::Index j = 0; j < width; ++j) {
    NeuronDiagnostic& diag = report.neurons[static_cast<std::size_t>(j)];
    const double lo = reg.act_in.col(j).minCoeff();
    const double hi = reg.act_in.col(j).maxCoeff();
    if (!(hi > lo)) continue;  // constant input: inconclusive

    std::vector<double> sum_f(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> sum_t(static_cast<std::size_t>(bins), 0.0);
    std::vector<int> count(static_cast<std::size_t>(bins), 0);
    const double width_bin = (hi - lo) / bins;
    // the neuron's additive share of the prediction, h_i * f_i(x_i)
    const double h = net.h(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      int b = static_cast<int>((reg.act_in(i, j) - lo) / width_bin);
      b = std::clamp(b, 0, bins - 1);
      sum_f[static_cast<std::size_t>(b)] += h * reg.act_out(i, j);
      sum_t[static_cast<std::size_t>(b)] += data.t(i);
      ++count[static_cast<std::size_t>(b)];
    }

    for (int b = 0; b < bins; ++b) {
      if (count[static_cast<std::size_t>(b)] < min_bin_count) continue;
      diag.bin_centers.push_back(lo + (b + 0.5) * width_bin);
      diag.mean_contribution.push_back(sum_f[static_cast<std::size_t>(b)] /
                                       count[static_cast<std::size_t>(b)]);
      diag.mean_target.push_back(sum_t[static_cast<std::size_t>(b)] /
                                 count[static_cast<std::size_t>(b)]);
      diag.bin_counts.push_back(count[static_cast<std::size_t>(b)]);
    }

    if (diag.bin_centers.size() < 2) continue;  // inconclusive

    const auto m = static_cast<Eigen::Index>(diag.bin_centers.size());
    Eigen::VectorXd fa = Eigen::Map<Eigen::VectorXd>(diag.mean_contribution.data(), m);
    Eigen::VectorXd ta = Eigen::Map<Eigen::VectorXd>(diag.mean_target.data(), m);
    const double std_f = std::sqrt((fa.array() - fa.mean()).square().mean());
    const double std_t = std::sqrt((ta.array() - ta.mean()).square().mean());
    // a neuron whose contribution is negligible at the target's scale (dead
    // output weight) carries no signal; its correlation would be noise
    if (std_f <= 1e-3 * std_t) continue;
    const Metrics metrics = compute_metrics(fa, ta);
    diag.correlation = metrics.pearson;  // stays absent for degenerate series
  }
  return report;
}

std::optional<double> DiagnosticReport::mean_correlation() const {
  double sum = 0.0;
  int count = 0;
  for (const NeuronDiagnostic& diag : neurons) {
    if (diag.correlation) {
      sum += *diag.correlation;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

ComplexityReport analyze_network(const Network& net, double margin, int n_pairs,
                                 std::uint64_t seed, const Box* domain) {
  if (!(margin > 0.0)) throw UsageError("analyze_network needs margin > 0");
  ComplexityReport report;
  report.input_dim = net.input_dim;
  report.margin = margin;

  for (const Layer& layer : net.layers) {
    std::vector<double> per_neuron;
    per_neuron.reserve(static_cast<std::size_t>(layer.width()));
    for (int j = 0; j < layer.width(); ++j) {
      per_neuron.push_back(lipschitz_activation_global(layer.act(j)));
    }
    report.activation_lipschitz.push_back(std::move(per_neuron));
  }

  report.network_bound = lipschitz_network(net);

  const Box box = domain ? *domain : Box::cube(net.input_dim, -1.0, 1.0);
  report.empirical_estimate = empirical_lipschitz(
      [&net](std::span<const double> x) {
        Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
        for (std::size_t d = 0; d < x.size(); ++d) row(0, static_cast<Eigen::Index>(d)) = x[d];
        return predict(net, row)(0);
      },
      box, n_pairs, seed);

  if (report.empirical_estimate > report.network_bound * (1.0 + 1e-12)) {
    throw NumericError("sampled Lipschitz estimate " + std::to_string(report.empirical_estimate) +
                       " exceeds the analytic bound " + std::to_string(report.network_bound));
  }

  if (report.network_bound > 0.0) {
    ComplexityQuery q;
    q.d = net.input_dim;
    q.lipschitz = report.network_bound;
    q.margin = margin;
    report.fat_shattering = fat_shattering_bound(q);
  } else {
    report.fat_shattering = static_cast<double>(net.input_dim);  // L -> 0 limit
  }
  return report;
}

}  // namespace saaf

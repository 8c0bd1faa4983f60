#include "saaf/train.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "saaf/basis.hpp"
#include "saaf/errors.hpp"
#include "saaf/rng.hpp"

namespace saaf {

std::pair<double, Eigen::VectorXd> mse_loss(const Eigen::VectorXd& predictions,
                                            const Eigen::VectorXd& targets) {
  if (predictions.size() == 0) throw UsageError("mse_loss needs a non-empty batch");
  if (predictions.size() != targets.size()) {
    throw UsageError("mse_loss needs matching prediction/target sizes");
  }
  const auto n = static_cast<double>(predictions.size());
  const Eigen::VectorXd diff = predictions - targets;
  const double loss = diff.squaredNorm() / n;
  return {loss, (2.0 / n) * diff};
}

std::pair<double, Eigen::VectorXd> l2_penalty(const Network& net, double lambda) {
  if (lambda < 0.0) throw UsageError("l2_penalty needs lambda >= 0");
  const Eigen::VectorXd params = get_params(net);
  return {lambda * params.squaredNorm(), 2.0 * lambda * params};
}

Optimizer::Optimizer(OptimizerConfig config, double learning_rate, Eigen::Index n_params)
    : config_(config), lr_(learning_rate) {
  if (!(learning_rate > 0.0)) throw UsageError("optimizer needs learning_rate > 0");
  momentum_ = Eigen::VectorXd::Zero(n_params);
  if (std::holds_alternative<AdamConfig>(config_)) {
    second_ = Eigen::VectorXd::Zero(n_params);
  }
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
  if (params.size() != momentum_.size() || grads.size() != momentum_.size()) {
    throw UsageError("optimizer step shape mismatch");
  }
  if (!grads.allFinite()) {
    for (Eigen::Index i = 0; i < grads.size(); ++i) {
      if (!std::isfinite(grads(i))) {
        throw NumericError("non-finite gradient at parameter index " + std::to_string(i));
      }
    }
  }
  ++t_;
  if (const auto* sgd = std::get_if<SgdConfig>(&config_)) {
    momentum_ = sgd->momentum * momentum_ + grads;
    params -= lr_ * momentum_;
  } else {
    const auto& adam = std::get<AdamConfig>(config_);
    momentum_ = adam.beta1 * momentum_ + (1.0 - adam.beta1) * grads;
    second_ = adam.beta2 * second_.array().matrix() +
              (1.0 - adam.beta2) * grads.array().square().matrix();
    const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(t_));
    params.array() -=
        lr_ * (momentum_.array() / bc1) / ((second_.array() / bc2).sqrt() + adam.eps);
  }
}

TrainReport train(Network& net, const Dataset& train_data, const Dataset* val_data,
                  const TrainConfig& config) {
  if (train_data.size() == 0) throw UsageError("train needs a non-empty dataset");
  if (train_data.features() != net.input_dim) {
    throw UsageError("dataset feature count does not match network input");
  }
  if (config.batch_size < 1) throw UsageError("train needs batch_size >= 1");
  if (config.epochs < 0) throw UsageError("train needs epochs >= 0");
  if (config.l2_lambda < 0.0) throw UsageError("train needs l2_lambda >= 0");

  const auto start = std::chrono::steady_clock::now();
  TrainReport report;

  Eigen::VectorXd params = get_params(net);
  Optimizer opt(config.optimizer, config.learning_rate, params.size());
  Rng shuffle_rng(derive_seed(config.seed, "train-shuffle"));

  const int n = static_cast<int>(train_data.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  // layers normalizing in training mode cannot take singleton batches
  const bool has_bn = std::any_of(net.layers.begin(), net.layers.end(),
                                  [](const Layer& l) { return l.bn.has_value(); });

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    int batches = 0;
    for (int begin = 0; begin < n; begin += config.batch_size) {
      int size = std::min(config.batch_size, n - begin);
      if (has_bn && size == 1) {
        if (n == 1) throw UsageError("batch normalization needs more than one training sample");
        break;  // drop a trailing singleton batch
      }
      Eigen::MatrixXd X(size, train_data.features());
      Eigen::VectorXd t(size);
      for (int i = 0; i < size; ++i) {
        X.row(i) = train_data.X.row(order[static_cast<std::size_t>(begin + i)]);
        t(i) = train_data.t(order[static_cast<std::size_t>(begin + i)]);
      }

      ForwardTrace trace;
      const Eigen::VectorXd y = forward(net, X, &trace, true);
      update_batchnorm_running(net, trace);
      auto [loss, loss_grad] = mse_loss(y, t);
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(batches));
      }
      epoch_loss += loss;
      ++batches;

      Eigen::VectorXd grads = backward(net, trace, loss_grad);
      if (config.l2_lambda > 0.0) grads += 2.0 * config.l2_lambda * params;
      try {
        opt.step(params, grads);
      } catch (const NumericError& e) {
        // find the failing index again to attach its name
        for (Eigen::Index i = 0; i < grads.size(); ++i) {
          if (!std::isfinite(grads(i))) {
            throw NumericError(std::string(e.what()) + " (" + param_name(net, i) + ")");
          }
        }
        throw;
      }
      set_params(net, params);
    }

    report.train_loss.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    if (val_data && val_data->size() > 0) {
      const Eigen::VectorXd vy = predict(net, val_data->X);
      report.val_loss.push_back(mse_loss(vy, val_data->t).first);
    }
    ++report.epochs_run;
  }

  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Saaf fit_saaf_ridge(const Eigen::VectorXd& xs, const Eigen::VectorXd& ts, const Saaf& proto,
                    double lambda) {
  if (xs.size() == 0) throw UsageError("fit_saaf_ridge needs at least one data point");
  if (xs.size() != ts.size()) throw UsageError("fit_saaf_ridge needs matching x/t sizes");
  if (lambda < 0.0) throw UsageError("fit_saaf_ridge needs lambda >= 0");
  if (proto.degree() < 1) {
    throw UsageError("fit_saaf_ridge needs degree 1 or 2 (degree 0 is not a training target)");
  }

  const BreakGrid& grid = proto.grid();
  const int n_seg = grid.segments();
  const int c = proto.degree();
  const Eigen::Index n = xs.size();
  const Eigen::Index p = n_seg + c;

  // design matrix of basis values, columns ordered [w..., v...]
  Eigen::MatrixXd design(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < n_seg; ++k) design(i, k) = basis(grid, k, c, xs(i));
    for (int j = 0; j < c; ++j) design(i, n_seg + j) = poly_basis(j, xs(i));
  }

  if (lambda == 0.0 && p > n) {
    throw NumericError("ridge system is singular with lambda = 0 and " + std::to_string(p) +
                       " parameters for " + std::to_string(n) +
                       " data points; a positive lambda is required");
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = design.transpose() * ts;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd theta = ldlt.solve(rhs);

  if (lambda == 0.0) {
    // the normal equations stay consistent even when rank deficient, so a
    // residual check alone cannot see non-uniqueness; with lambda = 0 inspect
    // the pivots (any positive lambda makes the system positive definite)
    const double max_pivot = ldlt.vectorD().cwiseAbs().maxCoeff();
    const double min_pivot = ldlt.vectorD().cwiseAbs().minCoeff();
    if (min_pivot <= static_cast<double>(p) * 1e-16 * max_pivot) {
      throw NumericError(
          "ridge system is singular; a positive lambda is required when the basis columns are "
          "linearly dependent");
    }
  }
  const Eigen::VectorXd residual = gram * theta - rhs;
  const double scale = std::max({rhs.lpNorm<Eigen::Infinity>(),
                                 (gram * theta).lpNorm<Eigen::Infinity>(), 1e-300});
  if (!theta.allFinite() || residual.lpNorm<Eigen::Infinity>() > 1e-6 * scale) {
    throw NumericError("ridge solve failed; the system is numerically singular");
  }

  std::vector<double> w(theta.data(), theta.data() + n_seg);
  std::vector<double> v(theta.data() + n_seg, theta.data() + p);
  return Saaf(c, grid, std::move(w), std::move(v));
}

}  // namespace saaf

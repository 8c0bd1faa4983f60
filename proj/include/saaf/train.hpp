#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "saaf/data.hpp"
#include "saaf/net.hpp"
#include "saaf/saaf.hpp"

namespace saaf {

struct SgdConfig {
  double momentum = 0.0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerConfig = std::variant<SgdConfig, AdamConfig>;

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 200;
  double l2_lambda = 1e-5;
  OptimizerConfig optimizer = AdamConfig{};
  std::uint64_t seed = 0;
  bool shuffle = true;
};

/// Mean squared error and its gradient 2(y - t)/n per element.
std::pair<double, Eigen::VectorXd> mse_loss(const Eigen::VectorXd& predictions,
                                            const Eigen::VectorXd& targets);

/// lambda * sum theta^2 over every trainable parameter, with gradient
/// 2 lambda theta in the flat layout.
std::pair<double, Eigen::VectorXd> l2_penalty(const Network& net, double lambda);

/// SGD-with-momentum or Adam over a flat parameter vector. Deterministic
/// given its inputs; throws NumericError on a non-finite gradient entry.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, double learning_rate, Eigen::Index n_params);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads);

 private:
  OptimizerConfig config_;
  double lr_;
  Eigen::VectorXd momentum_;  // SGD velocity, or Adam first moment
  Eigen::VectorXd second_;    // Adam second moment
  long t_ = 0;
};

struct TrainReport {
  std::vector<double> train_loss;  // per-epoch mean batch MSE (data term only)
  std::vector<double> val_loss;    // per-epoch validation MSE, when provided
  double wall_time_sec = 0.0;      // reporting only; never serialized
  int epochs_run = 0;
};

/// Mini-batch training of the mean-squared-error objective with L2 parameter
/// regularization. Aborts with NumericError if the loss turns non-finite,
/// annotating the failing parameter where the optimizer detects it.
TrainReport train(Network& net, const Dataset& train_data, const Dataset* val_data,
                  const TrainConfig& config);

/// Exact ridge fit of a single SAAF to one-dimensional data: minimizes
/// sum_i (f(x_i) - t_i)^2 + lambda ||(w, v)||^2 through the regularized
/// normal equations on the basis design matrix. `proto` supplies the degree
/// and break grid. Throws NumericError when the system is singular
/// (lambda = 0 with more parameters than points).
Saaf fit_saaf_ridge(const Eigen::VectorXd& xs, const Eigen::VectorXd& ts, const Saaf& proto,
                    double lambda);

}  // namespace saaf

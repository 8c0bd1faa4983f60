#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saaf/activation.hpp"

namespace saaf {

enum class Sharing {
  kPerNeuron,    // each neuron owns its activation parameters
  kLayerShared,  // one parameter set for the whole layer
};

/// Blueprint for one fully-connected hidden layer.
struct LayerSpec {
  int width = 1;
  Activation activation = ReLU{};
  Sharing sharing = Sharing::kPerNeuron;
  bool normalize = false;  // batch normalization before the activation
};

/// Batch-normalization state for one layer. gamma/beta are trainable; the
/// running statistics are inference-time state, updated explicitly by the
/// training loop.
struct BatchNorm {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  double eps = 1e-5;
  double momentum = 0.9;
};

struct Layer {
  Eigen::MatrixXd W;  // width x fan_in
  Eigen::VectorXd b;
  std::optional<BatchNorm> bn;
  Sharing sharing = Sharing::kPerNeuron;
  std::vector<Activation> acts;  // width entries, or one when layer-shared

  int width() const { return static_cast<int>(W.rows()); }
  const Activation& act(int neuron) const {
    return sharing == Sharing::kLayerShared ? acts[0] : acts[static_cast<std::size_t>(neuron)];
  }
};

/// Fully-connected regression network: hidden layers followed by one strictly
/// linear output neuron y = h . o + bias. The last hidden layer is the
/// regression layer.
struct Network {
  int input_dim = 0;
  std::vector<Layer> layers;
  Eigen::VectorXd h;  // output weights
  double out_bias = 0.0;

  int regression_width() const { return layers.back().width(); }
};

/// Weights drawn uniformly from +-sqrt(6/fan_in); biases zero; activation
/// parameters copied from the layer templates (SAAFs start as the identity).
/// Deterministic in the seed.
Network init_network(const std::vector<LayerSpec>& specs, int input_dim, std::uint64_t seed);

/// Per-batch intermediate values kept for the backward pass.
struct LayerTrace {
  Eigen::MatrixXd lin;      // X W^T + b
  Eigen::MatrixXd act_in;   // input to the activation (lin, or normalized lin)
  Eigen::MatrixXd act_out;
  // batch-normalization internals, filled only when the layer normalizes
  Eigen::MatrixXd xhat;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

struct ForwardTrace {
  Eigen::MatrixXd input;
  std::vector<LayerTrace> layers;
  bool training = false;
};

/// Forward pass over a batch (rows of X). In training mode normalized layers
/// use batch statistics (batch size >= 2 required); in inference mode they
/// use running statistics. Running statistics are never modified here; call
/// update_batchnorm_running with the trace to fold them in.
Eigen::VectorXd forward(const Network& net, const Eigen::MatrixXd& X, ForwardTrace* trace,
                        bool training);

/// Inference-mode forward without a trace.
Eigen::VectorXd predict(const Network& net, const Eigen::MatrixXd& X);

/// Folds the batch statistics recorded in a training-mode trace into the
/// running statistics: r = momentum * r + (1 - momentum) * batch.
void update_batchnorm_running(Network& net, const ForwardTrace& trace);

/// Exact reverse-mode gradients of sum_i loss_grad(i) * y_i with respect to
/// every trainable parameter, as a flat vector matching get_params. With
/// loss_grad from mse_loss this is the gradient of the mean batch loss.
Eigen::VectorXd backward(const Network& net, const ForwardTrace& trace,
                         const Eigen::VectorXd& loss_grad);

// ---------------------------------------------------------------------------
// Flat parameter view. Order: per layer W (row major), b, bn gamma, bn beta,
// activation parameters (per neuron, or the shared block); then output
// weights h and the output bias. Running statistics are state, not
// parameters, and are excluded.
// ---------------------------------------------------------------------------

Eigen::Index param_count(const Network& net);
Eigen::VectorXd get_params(const Network& net);
void set_params(Network& net, const Eigen::VectorXd& params);

/// Human-readable name of one flat-vector entry, e.g. "layer0.W[2,1]",
/// "layer1.act3.w[7]", "output.h[0]".
std::string param_name(const Network& net, Eigen::Index index);

// ---------------------------------------------------------------------------
// Standalone batch-normalization ops (used by the layer path).
// ---------------------------------------------------------------------------

struct BatchNormForward {
  Eigen::MatrixXd out;
  Eigen::MatrixXd xhat;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;  // biased batch variance
};

/// Training-mode normalization with batch statistics. Throws UsageError for
/// batches of fewer than two rows.
BatchNormForward batchnorm_forward(const Eigen::MatrixXd& X, const Eigen::VectorXd& gamma,
                                   const Eigen::VectorXd& beta, double eps);

struct BatchNormGrads {
  Eigen::MatrixXd dx;
  Eigen::VectorXd dgamma;
  Eigen::VectorXd dbeta;
};

/// Gradients through training-mode normalization, exact in inputs, scale and
/// shift.
BatchNormGrads batchnorm_backward(const Eigen::MatrixXd& X, const BatchNormForward& fwd,
                                  const Eigen::VectorXd& gamma, double eps,
                                  const Eigen::MatrixXd& upstream);

}  // namespace saaf

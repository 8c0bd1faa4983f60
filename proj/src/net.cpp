#include "saaf/net.hpp"

#include <cmath>
#include <utility>

#include "saaf/errors.hpp"
#include "saaf/rng.hpp"

namespace saaf {

namespace {

int shared_blocks(const Layer& layer) {
  return layer.sharing == Sharing::kLayerShared ? 1 : layer.width();
}

}  // namespace

Network init_network(const std::vector<LayerSpec>& specs, int input_dim, std::uint64_t seed) {
  if (specs.empty()) throw UsageError("init_network needs at least one layer spec");
  if (input_dim < 1) throw UsageError("init_network needs input_dim >= 1");

  Rng rng(derive_seed(seed, "net-init"));
  Network net;
  net.input_dim = input_dim;

  int fan_in = input_dim;
  for (const LayerSpec& spec : specs) {
    if (spec.width < 1) throw UsageError("layer width must be >= 1");
    Layer layer;
    layer.W.resize(spec.width, fan_in);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
        layer.W(r, c) = rng.uniform(-bound, bound);
      }
    }
    layer.b = Eigen::VectorXd::Zero(spec.width);
    if (spec.normalize) {
      BatchNorm bn;
      bn.gamma = Eigen::VectorXd::Ones(spec.width);
      bn.beta = Eigen::VectorXd::Zero(spec.width);
      bn.running_mean = Eigen::VectorXd::Zero(spec.width);
      bn.running_var = Eigen::VectorXd::Ones(spec.width);
      layer.bn = std::move(bn);
    }
    layer.sharing = spec.sharing;
    layer.acts.assign(static_cast<std::size_t>(spec.sharing == Sharing::kLayerShared ? 1 : spec.width),
                      spec.activation);
    net.layers.push_back(std::move(layer));
    fan_in = spec.width;
  }

  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  net.h.resize(fan_in);
  for (Eigen::Index i = 0; i < net.h.size(); ++i) net.h(i) = rng.uniform(-bound, bound);
  net.out_bias = 0.0;
  return net;
}

BatchNormForward batchnorm_forward(const Eigen::MatrixXd& X, const Eigen::VectorXd& gamma,
                                   const Eigen::VectorXd& beta, double eps) {
  if (X.rows() < 2) {
    throw UsageError("batch normalization in training mode needs batch size >= 2");
  }
  BatchNormForward f;
  const auto n = static_cast<double>(X.rows());
  f.mean = X.colwise().mean();
  f.var = (X.rowwise() - f.mean.transpose()).array().square().colwise().sum() / n;
  f.xhat = (X.rowwise() - f.mean.transpose()).array().rowwise() /
           (f.var.array() + eps).sqrt().transpose();
  f.out = (f.xhat.array().rowwise() * gamma.transpose().array()).rowwise() +
          beta.transpose().array();
  return f;
}

BatchNormGrads batchnorm_backward(const Eigen::MatrixXd& X, const BatchNormForward& fwd,
                                  const Eigen::VectorXd& gamma, double eps,
                                  const Eigen::MatrixXd& upstream) {
  BatchNormGrads g;
  const auto n = static_cast<double>(X.rows());
  const Eigen::ArrayXd inv_std = (fwd.var.array() + eps).rsqrt();

  g.dgamma = (upstream.array() * fwd.xhat.array()).colwise().sum();
  g.dbeta = upstream.colwise().sum();

  const Eigen::MatrixXd dxhat = upstream.array().rowwise() * gamma.transpose().array();
  const Eigen::MatrixXd centered = X.rowwise() - fwd.mean.transpose();
  const Eigen::ArrayXd dvar =
      (dxhat.array() * centered.array()).colwise().sum().transpose() * (-0.5) * inv_std.pow(3);
  const Eigen::ArrayXd dmean =
      (dxhat.array().rowwise() * (-inv_std).transpose()).colwise().sum().transpose();

  g.dx = dxhat.array().rowwise() * inv_std.transpose();
  g.dx.array().rowwise() += dmean.transpose() / n;
  g.dx.array() += centered.array().rowwise() * (2.0 * dvar / n).transpose();
  return g;
}

Eigen::VectorXd forward(const Network& net, const Eigen::MatrixXd& X, ForwardTrace* trace,
                        bool training) {
  if (X.cols() != net.input_dim) {
    throw UsageError("input has " + std::to_string(X.cols()) + " features, network expects " +
                     std::to_string(net.input_dim));
  }
  if (!X.allFinite()) throw DataError("forward input contains non-finite values");

  if (trace) {
    trace->input = X;
    trace->layers.clear();
    trace->layers.reserve(net.layers.size());
    trace->training = training;
  }

  Eigen::MatrixXd cur = X;
  for (const Layer& layer : net.layers) {
    LayerTrace lt;
    lt.lin = (cur * layer.W.transpose()).rowwise() + layer.b.transpose();
    if (layer.bn) {
      if (training) {
        BatchNormForward f = batchnorm_forward(lt.lin, layer.bn->gamma, layer.bn->beta,
                                               layer.bn->eps);
        lt.act_in = std::move(f.out);
        lt.xhat = std::move(f.xhat);
        lt.mean = std::move(f.mean);
        lt.var = std::move(f.var);
      } else {
        const Eigen::ArrayXd inv_std = (layer.bn->running_var.array() + layer.bn->eps).rsqrt();
        lt.act_in = ((lt.lin.rowwise() - layer.bn->running_mean.transpose()).array().rowwise() *
                     (layer.bn->gamma.array() * inv_std).transpose())
                        .rowwise() +
                    layer.bn->beta.transpose().array();
      }
    } else {
      lt.act_in = lt.lin;
    }

    lt.act_out.resize(lt.act_in.rows(), lt.act_in.cols());
    for (Eigen::Index j = 0; j < lt.act_in.cols(); ++j) {
      const Activation& act = layer.act(static_cast<int>(j));
      for (Eigen::Index i = 0; i < lt.act_in.rows(); ++i) {
        lt.act_out(i, j) = activation_eval(act, lt.act_in(i, j));
      }
    }

    cur = lt.act_out;
    if (trace) trace->layers.push_back(std::move(lt));
  }

  Eigen::VectorXd y = cur * net.h;
  y.array() += net.out_bias;
  return y;
}

Eigen::VectorXd predict(const Network& net, const Eigen::MatrixXd& X) {
  return forward(net, X, nullptr, false);
}

void update_batchnorm_running(Network& net, const ForwardTrace& trace) {
  if (!trace.training) throw UsageError("running statistics update needs a training-mode trace");
  if (trace.layers.size() != net.layers.size()) {
    throw UsageError("trace does not match network");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    if (!layer.bn) continue;
    const LayerTrace& lt = trace.layers[l];
    const double m = layer.bn->momentum;
    layer.bn->running_mean = m * layer.bn->running_mean + (1.0 - m) * lt.mean;
    layer.bn->running_var = m * layer.bn->running_var + (1.0 - m) * lt.var;
  }
}

// ---------------------------------------------------------------------------
// Flat parameter plumbing
// ---------------------------------------------------------------------------

namespace {

// Walks the canonical parameter layout, invoking fn(block_label, size) in
// order. Returns the total parameter count.
template <typename Fn>
Eigen::Index walk_blocks(const Network& net, Fn&& fn) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    total += fn(prefix + "W", layer.W.size());
    total += fn(prefix + "b", layer.b.size());
    if (layer.bn) {
      total += fn(prefix + "bn.gamma", layer.bn->gamma.size());
      total += fn(prefix + "bn.beta", layer.bn->beta.size());
    }
    for (int blk = 0; blk < shared_blocks(layer); ++blk) {
      const std::string label = layer.sharing == Sharing::kLayerShared
                                    ? prefix + "act"
                                    : prefix + "act" + std::to_string(blk);
      total += fn(label, static_cast<Eigen::Index>(
                             activation_param_count(layer.acts[static_cast<std::size_t>(blk)])));
    }
  }
  total += fn("output.h", net.h.size());
  total += fn("output.bias", static_cast<Eigen::Index>(1));
  return total;
}

}  // namespace

Eigen::Index param_count(const Network& net) {
  return walk_blocks(net, [](const std::string&, Eigen::Index n) { return n; });
}

Eigen::VectorXd get_params(const Network& net) {
  Eigen::VectorXd out(param_count(net));
  Eigen::Index pos = 0;
  for (const Layer& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) out(pos++) = layer.W(r, c);
    }
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) out(pos++) = layer.b(i);
    if (layer.bn) {
      for (Eigen::Index i = 0; i < layer.bn->gamma.size(); ++i) out(pos++) = layer.bn->gamma(i);
      for (Eigen::Index i = 0; i < layer.bn->beta.size(); ++i) out(pos++) = layer.bn->beta(i);
    }
    for (int blk = 0; blk < shared_blocks(layer); ++blk) {
      const Activation& act = layer.acts[static_cast<std::size_t>(blk)];
      const int n = activation_param_count(act);
      activation_get_params(act, std::span<double>(out.data() + pos, static_cast<std::size_t>(n)));
      pos += n;
    }
  }
  for (Eigen::Index i = 0; i < net.h.size(); ++i) out(pos++) = net.h(i);
  out(pos++) = net.out_bias;
  return out;
}

void set_params(Network& net, const Eigen::VectorXd& params) {
  if (params.size() != param_count(net)) {
    throw UsageError("parameter vector does not match network");
  }
  Eigen::Index pos = 0;
  for (Layer& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) layer.W(r, c) = params(pos++);
    }
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = params(pos++);
    if (layer.bn) {
      for (Eigen::Index i = 0; i < layer.bn->gamma.size(); ++i) layer.bn->gamma(i) = params(pos++);
      for (Eigen::Index i = 0; i < layer.bn->beta.size(); ++i) layer.bn->beta(i) = params(pos++);
    }
    for (int blk = 0; blk < shared_blocks(layer); ++blk) {
      Activation& act = layer.acts[static_cast<std::size_t>(blk)];
      const int n = activation_param_count(act);
      activation_set_params(act,
                            std::span<const double>(params.data() + pos, static_cast<std::size_t>(n)));
      pos += n;
    }
  }
  for (Eigen::Index i = 0; i < net.h.size(); ++i) net.h(i) = params(pos++);
  net.out_bias = params(pos++);
}

std::string param_name(const Network& net, Eigen::Index index) {
  if (index < 0 || index >= param_count(net)) {
    throw UsageError("parameter index out of range");
  }
  std::string result;
  Eigen::Index pos = 0;
  walk_blocks(net, [&](const std::string& label, Eigen::Index n) {
    if (result.empty() && index < pos + n) {
      const Eigen::Index off = index - pos;
      if (label.size() >= 2 && label.substr(label.size() - 2) == ".W") {
        // recover the row/col of the weight entry
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
          if (label == "layer" + std::to_string(l) + ".W") {
            const auto cols = net.layers[l].W.cols();
            result = label + "[" + std::to_string(off / cols) + "," +
                     std::to_string(off % cols) + "]";
          }
        }
      } else if (label.find(".act") != std::string::npos) {
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
          const std::string prefix = "layer" + std::to_string(l) + ".act";
          if (label.rfind(prefix, 0) == 0) {
            const Layer& layer = net.layers[l];
            const int blk = layer.sharing == Sharing::kLayerShared
                                ? 0
                                : std::stoi(label.substr(prefix.size()));
            result = label + "." +
                     activation_param_name(layer.acts[static_cast<std::size_t>(blk)],
                                           static_cast<int>(off));
          }
        }
      } else if (label == "output.bias") {
        result = label;
      } else {
        result = label + "[" + std::to_string(off) + "]";
      }
    }
    pos += n;
    return n;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

Eigen::VectorXd backward(const Network& net, const ForwardTrace& trace,
                         const Eigen::VectorXd& loss_grad) {
  if (trace.layers.size() != net.layers.size()) {
    throw UsageError("trace does not match network");
  }
  if (loss_grad.size() != trace.input.rows()) {
    throw UsageError("loss gradient does not match trace batch size");
  }

  Eigen::VectorXd grads = Eigen::VectorXd::Zero(param_count(net));

  // Locate each layer's block offsets in the flat layout.
  struct Offsets {
    Eigen::Index w = 0, b = 0, gamma = 0, beta = 0, act = 0;
  };
  std::vector<Offsets> offsets(net.layers.size());
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    offsets[l].w = pos;
    pos += layer.W.size();
    offsets[l].b = pos;
    pos += layer.b.size();
    if (layer.bn) {
      offsets[l].gamma = pos;
      pos += layer.bn->gamma.size();
      offsets[l].beta = pos;
      pos += layer.bn->beta.size();
    }
    offsets[l].act = pos;
    for (int blk = 0; blk < shared_blocks(layer); ++blk) {
      pos += activation_param_count(layer.acts[static_cast<std::size_t>(blk)]);
    }
  }
  const Eigen::Index h_off = pos;
  const Eigen::Index bias_off = pos + net.h.size();

  const Eigen::MatrixXd& last_out = trace.layers.back().act_out;

  // output neuron
  grads.segment(h_off, net.h.size()) = last_out.transpose() * loss_grad;
  grads(bias_off) = loss_grad.sum();

  // gradient flowing into the last hidden layer's outputs
  Eigen::MatrixXd d_out = loss_grad * net.h.transpose();

  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const Layer& layer = net.layers[static_cast<std::size_t>(l)];
    const LayerTrace& lt = trace.layers[static_cast<std::size_t>(l)];
    const Eigen::Index width = layer.W.rows();
    const Eigen::Index batch = lt.act_in.rows();

    // through the activation: input gradient and parameter gradients
    Eigen::MatrixXd d_act_in(batch, width);
    Eigen::Index act_pos = offsets[static_cast<std::size_t>(l)].act;
    std::vector<double> pg;
    for (Eigen::Index j = 0; j < width; ++j) {
      const Activation& act = layer.act(static_cast<int>(j));
      const int np = activation_param_count(act);
      const Eigen::Index block_off =
          layer.sharing == Sharing::kLayerShared ? act_pos : act_pos + static_cast<Eigen::Index>(j) * np;
      pg.resize(static_cast<std::size_t>(np));
      for (Eigen::Index i = 0; i < batch; ++i) {
        const double x = lt.act_in(i, j);
        const double up = d_out(i, j);
        d_act_in(i, j) = up * activation_deriv(act, x);
        if (np > 0 && up != 0.0) {
          activation_param_grads(act, x, pg);
          for (int p = 0; p < np; ++p) {
            grads(block_off + p) += up * pg[static_cast<std::size_t>(p)];
          }
        }
      }
    }

    // through batch normalization
    Eigen::MatrixXd d_lin;
    if (layer.bn) {
      if (trace.training) {
        BatchNormForward f;
        f.xhat = lt.xhat;
        f.mean = lt.mean;
        f.var = lt.var;
        BatchNormGrads g = batchnorm_backward(lt.lin, f, layer.bn->gamma, layer.bn->eps, d_act_in);
        d_lin = std::move(g.dx);
        grads.segment(offsets[static_cast<std::size_t>(l)].gamma, width) = g.dgamma;
        grads.segment(offsets[static_cast<std::size_t>(l)].beta, width) = g.dbeta;
      } else {
        const Eigen::ArrayXd inv_std = (layer.bn->running_var.array() + layer.bn->eps).rsqrt();
        const Eigen::MatrixXd xhat_run =
            (lt.lin.rowwise() - layer.bn->running_mean.transpose()).array().rowwise() *
            inv_std.transpose();
        grads.segment(offsets[static_cast<std::size_t>(l)].gamma, width) =
            (d_act_in.array() * xhat_run.array()).colwise().sum();
        grads.segment(offsets[static_cast<std::size_t>(l)].beta, width) =
            d_act_in.colwise().sum();
        d_lin = d_act_in.array().rowwise() * (layer.bn->gamma.array() * inv_std).transpose();
      }
    } else {
      d_lin = std::move(d_act_in);
    }

    // through the affine map
    const Eigen::MatrixXd& layer_in =
        l == 0 ? trace.input : trace.layers[static_cast<std::size_t>(l) - 1].act_out;
    const Eigen::MatrixXd dW = d_lin.transpose() * layer_in;
    Eigen::Index w_pos = offsets[static_cast<std::size_t>(l)].w;
    for (Eigen::Index r = 0; r < dW.rows(); ++r) {
      for (Eigen::Index c = 0; c < dW.cols(); ++c) grads(w_pos++) = dW(r, c);
    }
    grads.segment(offsets[static_cast<std::size_t>(l)].b, width) = d_lin.colwise().sum();

    if (l > 0) d_out = d_lin * layer.W;
  }

  return grads;
}

}  // namespace saaf

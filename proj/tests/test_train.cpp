#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "saaf/basis.hpp"
#include "saaf/data.hpp"
#include "saaf/errors.hpp"
#include "saaf/net.hpp"
#include "saaf/rng.hpp"
#include "saaf/train.hpp"

using namespace saaf;

namespace {

std::vector<LayerSpec> identity_saaf_arch(int width) {
  // identity SAAFs on a wide grid keep the whole network affine at init
  return {LayerSpec{width, Saaf::identity(1, BreakGrid::uniform(8, -8.0, 8.0)),
                    Sharing::kPerNeuron, false}};
}

// Ridge objective sum (f(x_i) - t_i)^2 + lambda ||theta||^2 and its gradient,
// assembled from the basis functions directly.
std::pair<double, Eigen::VectorXd> ridge_objective(const Saaf& f, const Eigen::VectorXd& xs,
                                                   const Eigen::VectorXd& ts, double lambda) {
  const int n_seg = f.grid().segments();
  const int c = f.degree();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_seg + c);
  double obj = 0.0;
  std::vector<double> gw(static_cast<std::size_t>(n_seg)), gv(static_cast<std::size_t>(c));
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const double r = f(xs(i)) - ts(i);
    obj += r * r;
    f.param_grads(xs(i), gw, gv);
    for (int k = 0; k < n_seg; ++k) grad(k) += 2.0 * r * gw[static_cast<std::size_t>(k)];
    for (int j = 0; j < c; ++j) grad(n_seg + j) += 2.0 * r * gv[static_cast<std::size_t>(j)];
  }
  Eigen::VectorXd theta(n_seg + c);
  f.get_params(std::span<double>(theta.data(), static_cast<std::size_t>(theta.size())));
  obj += lambda * theta.squaredNorm();
  grad += 2.0 * lambda * theta;
  return {obj, grad};
}

double max_abs_w(const Saaf& f) {
  double m = 0.0;
  for (double w : f.w()) m = std::max(m, std::abs(w));
  return m;
}

}  // namespace

TEST_CASE("mse loss and gradient") {
  Eigen::VectorXd y(1), t(1);
  y << 1.0;
  t << 0.0;
  auto [loss, grad] = mse_loss(y, t);
  CHECK(loss == 1.0);
  CHECK(grad(0) == 2.0);

  Eigen::VectorXd same(3);
  same << 1.0, -2.0, 0.5;
  auto [zero, zgrad] = mse_loss(same, same);
  CHECK(zero == 0.0);
  CHECK(zgrad.isZero());

  // joint permutation leaves the loss unchanged
  Eigen::VectorXd y2(3), t2(3);
  y2 << 3.0, 1.0, -2.0;
  t2 << 1.0, 0.0, 2.0;
  Eigen::VectorXd yp(3), tp(3);
  yp << 1.0, -2.0, 3.0;
  tp << 0.0, 2.0, 1.0;
  CHECK(mse_loss(y2, t2).first == doctest::Approx(mse_loss(yp, tp).first).epsilon(1e-15));

  CHECK_THROWS_AS(mse_loss(Eigen::VectorXd(), Eigen::VectorXd()), UsageError);
}

TEST_CASE("l2 penalty covers every trainable parameter") {
  Network net = init_network(identity_saaf_arch(2), 1, 3);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(param_count(net));
  params(0) = 3.0;
  set_params(net, params);

  auto [zero_pen, zero_grad] = l2_penalty(net, 0.0);
  CHECK(zero_pen == 0.0);
  CHECK(zero_grad.isZero());

  auto [pen, grad] = l2_penalty(net, 1e-5);
  CHECK(pen == doctest::Approx(9e-5).epsilon(1e-12));
  CHECK(grad(0) == doctest::Approx(2e-5 * 3.0));

  // SAAF w/v parameters are included: set one and watch the penalty move
  const Eigen::Index n = param_count(net);
  params = Eigen::VectorXd::Zero(n);
  params(n - 2) = 2.0;  // inside output h / activation region, still a parameter
  set_params(net, params);
  CHECK(l2_penalty(net, 1.0).first == doctest::Approx(4.0));
}

TEST_CASE("sgd step") {
  Eigen::VectorXd p(1), g(1);
  p << 1.0;
  g << 1.0;
  Optimizer opt(SgdConfig{0.0}, 0.1, 1);
  opt.step(p, g);
  CHECK(p(0) == doctest::Approx(0.9));
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  Eigen::VectorXd p(3);
  p << 1.0, -2.0, 0.5;
  const Eigen::VectorXd orig = p;
  Optimizer opt(AdamConfig{}, 0.1, 3);
  for (int i = 0; i < 10; ++i) opt.step(p, Eigen::VectorXd::Zero(3));
  CHECK(p == orig);
}

TEST_CASE("optimizer rejects non-finite gradients") {
  Eigen::VectorXd p(2), g(2);
  p << 1.0, 1.0;
  g << 1.0, std::nan("");
  Optimizer opt(SgdConfig{}, 0.1, 2);
  CHECK_THROWS_AS(opt.step(p, g), NumericError);
}

TEST_CASE("identical seeds give identical trajectories") {
  const Dataset ds = gen_additive(64, 2, 5);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 77;

  Network a = init_network(identity_saaf_arch(3), 2, 11);
  Network b = init_network(identity_saaf_arch(3), 2, 11);
  const TrainReport ra = train(a, ds, nullptr, cfg);
  const TrainReport rb = train(b, ds, nullptr, cfg);
  CHECK(get_params(a) == get_params(b));
  CHECK(ra.train_loss == rb.train_loss);
}

TEST_CASE("training fits a linear target to high accuracy") {
  Rng rng(13);
  Dataset ds;
  ds.X.resize(128, 1);
  ds.t.resize(128);
  for (int i = 0; i < 128; ++i) {
    ds.X(i, 0) = rng.uniform(-1.0, 1.0);
    ds.t(i) = 2.0 * ds.X(i, 0) + 1.0;
  }
  Network net = init_network(identity_saaf_arch(2), 1, 21);
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.learning_rate = 5e-3;
  cfg.l2_lambda = 0.0;
  cfg.batch_size = 32;
  cfg.seed = 1;
  train(net, ds, nullptr, cfg);
  const double rmse = compute_metrics(predict(net, ds.X), ds.t).rmse;
  CHECK(rmse < 1e-3);
}

TEST_CASE("zero epochs leave parameters untouched") {
  const Dataset ds = gen_additive(32, 2, 5);
  Network net = init_network(identity_saaf_arch(3), 2, 11);
  const Eigen::VectorXd before = get_params(net);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainReport report = train(net, ds, nullptr, cfg);
  CHECK(report.epochs_run == 0);
  CHECK(get_params(net) == before);
}

TEST_CASE("loss trends down on the 21-point task") {
  const Dataset ds = gen_fig2(3);
  Network net = init_network(
      {LayerSpec{8, Saaf::identity(2, BreakGrid::uniform(22, -1.1, 1.1)), Sharing::kPerNeuron,
                 false}},
      1, 5);
  TrainConfig cfg;
  cfg.batch_size = 21;
  cfg.epochs = 200;
  const TrainReport report = train(net, ds, nullptr, cfg);
  CHECK(report.train_loss.back() <= report.train_loss.front());
}

TEST_CASE("training diverges loudly on an absurd learning rate") {
  const Dataset ds = gen_fig2(3);
  Network net = init_network(identity_saaf_arch(4), 1, 5);
  TrainConfig cfg;
  cfg.optimizer = SgdConfig{0.0};
  cfg.learning_rate = 1e18;
  cfg.epochs = 50;
  CHECK_THROWS_AS(train(net, ds, nullptr, cfg), NumericError);
}

// ---------------------------------------------------------------------------
// ridge fit
// ---------------------------------------------------------------------------

TEST_CASE("ridge reproduces exactly representable data") {
  Eigen::VectorXd xs(2), ts(2);
  xs << 0.2, 0.8;
  ts << 1.0, 2.5;
  const Saaf proto(1, BreakGrid({0.0, 1.0}));
  const Saaf fitted = fit_saaf_ridge(xs, ts, proto, 1e-12);
  CHECK(fitted(0.2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fitted(0.8) == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("ridge satisfies the first-order optimality condition") {
  const Dataset ds = gen_fig2(9);
  for (int c : {1, 2}) {
    const Saaf proto(c, BreakGrid::uniform(40, -1.1, 1.1));
    const Saaf fitted = fit_saaf_ridge(ds.X.col(0), ds.t, proto, 1e-5);
    const auto [obj, grad] = ridge_objective(fitted, ds.X.col(0), ds.t, 1e-5);
    CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-8 * std::max(1.0, obj));
  }
}

TEST_CASE("huge lambda shrinks the segment weights to nothing") {
  const Dataset ds = gen_fig2(9);
  const Saaf proto(2, BreakGrid::uniform(30, -1.1, 1.1));
  const Saaf fitted = fit_saaf_ridge(ds.X.col(0), ds.t, proto, 1e6);
  CHECK(max_abs_w(fitted) < 1e-4);
  // what is left is essentially the pure polynomial term
  for (double x = -1.0; x <= 1.0; x += 0.2) {
    const double poly = fitted.v()[0] * poly_basis(0, x) + fitted.v()[1] * poly_basis(1, x);
    CHECK(fitted(x) == doctest::Approx(poly).epsilon(0.02));
  }
}

TEST_CASE("singular system without regularization is reported") {
  const Dataset ds = gen_fig2(9).X.col(0).size() ? gen_fig2(9) : Dataset{};
  Eigen::VectorXd xs = ds.X.col(0).head(5);
  Eigen::VectorXd ts = ds.t.head(5);
  const Saaf proto(1, BreakGrid::uniform(50, -1.1, 1.1));
  CHECK_THROWS_AS(fit_saaf_ridge(xs, ts, proto, 0.0), NumericError);
  CHECK_THROWS_AS(fit_saaf_ridge(Eigen::VectorXd(), Eigen::VectorXd(), proto, 1.0), UsageError);
}

TEST_CASE("gradient-based training agrees with the ridge solution") {
  const Dataset ds = gen_fig2(12);
  const double lambda = 1e-5;
  const Saaf proto(2, BreakGrid::uniform(22, -1.1, 1.1));
  const Saaf ridge = fit_saaf_ridge(ds.X.col(0), ds.t, proto, lambda);
  const double ridge_rmse =
      compute_metrics(ds.X.col(0).unaryExpr([&](double x) { return ridge(x); }), ds.t).rmse;

  // full-batch Adam on the identical objective
  Saaf model = Saaf::identity(2, BreakGrid::uniform(22, -1.1, 1.1));
  Eigen::VectorXd theta(model.param_count());
  model.get_params(std::span<double>(theta.data(), static_cast<std::size_t>(theta.size())));
  Optimizer opt(AdamConfig{}, 5e-3, theta.size());
  for (int it = 0; it < 30000; ++it) {
    const auto [obj, grad] = ridge_objective(model, ds.X.col(0), ds.t, lambda);
    opt.step(theta, grad);
    model.set_params(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
  }
  const double sgd_rmse =
      compute_metrics(ds.X.col(0).unaryExpr([&](double x) { return model(x); }), ds.t).rmse;
  CHECK(std::abs(sgd_rmse - ridge_rmse) < 1e-3);
}

TEST_CASE("stronger regularization never raises max |w|") {
  const Dataset ds = gen_fig2(21);
  const Saaf proto(2, BreakGrid::uniform(200, -1.1, 1.1));
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-6, 1e-4, 1e-2}) {
    const Saaf fitted = fit_saaf_ridge(ds.X.col(0), ds.t, proto, lambda);
    const double m = max_abs_w(fitted);
    CHECK(m <= prev * (1.0 + 1e-9));
    prev = m;
  }
}

TEST_CASE("full-batch gradient descent decreases the loss monotonically") {
  const Dataset ds = gen_fig2(30);
  Network net = init_network(
      {LayerSpec{4, Saaf::identity(2, BreakGrid::uniform(22, -1.1, 1.1)), Sharing::kPerNeuron,
                 false}},
      1, 2);
  TrainConfig cfg;
  cfg.optimizer = SgdConfig{0.0};
  cfg.learning_rate = 1e-3;
  cfg.batch_size = static_cast<int>(ds.size());  // full batch
  cfg.epochs = 100;
  cfg.shuffle = false;
  cfg.l2_lambda = 0.0;
  const TrainReport report = train(net, ds, nullptr, cfg);
  for (std::size_t e = 1; e < report.train_loss.size(); ++e) {
    CHECK(report.train_loss[e] <= report.train_loss[e - 1] + 1e-12);
  }
}

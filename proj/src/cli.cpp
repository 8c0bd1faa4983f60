#include "saaf/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "saaf/analysis.hpp"
#include "saaf/data.hpp"
#include "saaf/errors.hpp"
#include "saaf/net.hpp"
#include "saaf/rng.hpp"
#include "saaf/serialize.hpp"
#include "saaf/train.hpp"

namespace saaf::cli {

namespace {

const std::set<std::string> kCommonKeys = {"seed", "out"};
const std::set<std::string> kDataKeys = {"data.source", "data.n",      "data.m",
                                         "data.path",   "data.target", "data.normalize",
                                         "data.noise_sigma"};
const std::set<std::string> kNetKeys = {"net.hidden", "net.activation", "net.sharing",
                                        "net.batchnorm", "saaf.segments", "saaf.lo", "saaf.hi"};
const std::set<std::string> kTrainKeys = {"train.optimizer", "train.lr",     "train.momentum",
                                          "train.beta1",     "train.beta2",  "train.eps",
                                          "train.batch",     "train.epochs", "train.lambda",
                                          "train.shuffle",   "split.fraction"};

const std::set<std::string> kFit1dKeys = {"fit1d.c", "fit1d.segments", "fit1d.lambda",
                                          "saaf.lo", "saaf.hi"};
const std::set<std::string> kEvalKeys = {"eval.network"};
const std::set<std::string> kAnalyzeKeys = {"analyze.network", "analyze.gamma", "analyze.pairs",
                                            "analyze.diagnostic", "analyze.bins"};
const std::set<std::string> kBenchKeys = {"bench.activations", "bench.folds"};

// one config file can drive the whole workflow, so every command validates
// against the union; typos still fail fast
std::set<std::string> all_keys() {
  std::set<std::string> out = kCommonKeys;
  for (const auto* group : {&kDataKeys, &kNetKeys, &kTrainKeys, &kFit1dKeys, &kEvalKeys,
                            &kAnalyzeKeys, &kBenchKeys}) {
    out.insert(group->begin(), group->end());
  }
  return out;
}

std::string format_double_impl(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& cfg) {
  const std::filesystem::path out = cfg.get_string("out", "out");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory " + out.string());
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << content;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Config -> domain objects
// ---------------------------------------------------------------------------

BreakGrid grid_from_config(const ExperimentConfig& cfg) {
  return BreakGrid::uniform(cfg.get_int("saaf.segments", kDefaultSegments),
                            cfg.get_double("saaf.lo", kDefaultGridLo),
                            cfg.get_double("saaf.hi", kDefaultGridHi));
}

Dataset dataset_from_config(const ExperimentConfig& cfg) {
  const std::string source = cfg.get_string("data.source", "additive");
  const std::uint64_t seed = derive_seed(cfg.get_seed(), "data");
  Dataset ds;
  if (source == "fig2") {
    ds = gen_fig2(seed, cfg.get_double("data.noise_sigma", 0.05));
  } else if (source == "additive") {
    ds = gen_additive(cfg.get_int("data.n", 5000), cfg.get_int("data.m", 3), seed);
  } else if (source == "csv") {
    const std::string path = cfg.get_string("data.path", "");
    const std::string target = cfg.get_string("data.target", "");
    if (path.empty() || target.empty()) {
      throw UsageError("data.source = csv needs data.path and data.target");
    }
    CsvReport report;
    ds = load_csv(path, target, &report);
    if (!report.rejected_lines.empty()) {
      std::cerr << "warning: rejected " << report.rejected_lines.size() << " row(s) of " << path
                << " (lines";
      for (int line : report.rejected_lines) std::cerr << ' ' << line;
      std::cerr << ")\n";
    }
  } else {
    throw UsageError("unknown data.source '" + source + "'; expected fig2, additive or csv");
  }

  const std::string norm = cfg.get_string("data.normalize", "none");
  if (norm == "minmax") {
    auto [scaled, tr] = normalize(ds, NormalizeMode::kMinMaxToGrid);
    for (int j : tr.constant_features) {
      std::cerr << "warning: feature " << j << " is constant; normalized to zero\n";
    }
    ds = std::move(scaled);
  } else if (norm == "zscore") {
    auto [scaled, tr] = normalize(ds, NormalizeMode::kZScore);
    for (int j : tr.constant_features) {
      std::cerr << "warning: feature " << j << " is constant; normalized to zero\n";
    }
    ds = std::move(scaled);
  } else if (norm != "none") {
    throw UsageError("unknown data.normalize '" + norm + "'; expected none, minmax or zscore");
  }
  return ds;
}

std::vector<LayerSpec> layer_specs_from_config(const ExperimentConfig& cfg) {
  const ActivationSpec spec =
      parse_activation_name(cfg.get_string("net.activation", "ReLU"));
  const BreakGrid grid = grid_from_config(cfg);

  std::vector<int> widths;
  for (const std::string& s : cfg.get_list("net.hidden", {"8"})) {
    int w = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), w);
    if (ec != std::errc() || ptr != s.data() + s.size() || w < 1) {
      throw UsageError("net.hidden entries must be positive integers, got '" + s + "'");
    }
    widths.push_back(w);
  }

  const std::string sharing_name = cfg.get_string("net.sharing", "per-neuron");
  Sharing sharing;
  if (sharing_name == "per-neuron") {
    sharing = Sharing::kPerNeuron;
  } else if (sharing_name == "layer-shared") {
    sharing = Sharing::kLayerShared;
  } else {
    throw UsageError("net.sharing must be per-neuron or layer-shared");
  }
  const bool batchnorm = cfg.get_bool("net.batchnorm", false);

  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    LayerSpec ls;
    ls.width = widths[i];
    ls.sharing = sharing;
    ls.normalize = batchnorm;
    const bool is_regression_layer = (i + 1 == widths.size());
    if (spec.regression_only && !is_regression_layer) {
      ls.activation = ReLU{};  // R- variants keep ReLU off the regression layer
    } else {
      ls.activation = make_activation(spec.kind, grid);
    }
    specs.push_back(std::move(ls));
  }
  return specs;
}

TrainConfig train_config_from_config(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.learning_rate = cfg.get_double("train.lr", 1e-3);
  tc.batch_size = cfg.get_int("train.batch", 32);
  tc.epochs = cfg.get_int("train.epochs", 200);
  tc.l2_lambda = cfg.get_double("train.lambda", 1e-5);
  tc.seed = cfg.get_seed();
  tc.shuffle = cfg.get_bool("train.shuffle", true);
  const std::string opt = cfg.get_string("train.optimizer", "adam");
  if (opt == "adam") {
    AdamConfig a;
    a.beta1 = cfg.get_double("train.beta1", 0.9);
    a.beta2 = cfg.get_double("train.beta2", 0.999);
    a.eps = cfg.get_double("train.eps", 1e-8);
    tc.optimizer = a;
  } else if (opt == "sgd") {
    SgdConfig s;
    s.momentum = cfg.get_double("train.momentum", 0.9);
    tc.optimizer = s;
  } else {
    throw UsageError("train.optimizer must be adam or sgd");
  }
  return tc;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["rmse"] = m.rmse;
  j["mae"] = m.mae;
  if (m.pearson) {
    j["pearson"] = *m.pearson;
  } else {
    j["pearson"] = nullptr;
  }
  return j;
}

std::string loss_curve_csv(const TrainReport& report) {
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
    csv << e << ',' << format_double_impl(report.train_loss[e]) << '\n';
  }
  return csv.str();
}

}  // namespace

std::string format_double(double value) { return format_double_impl(value); }

// ---------------------------------------------------------------------------
// fit1d
// ---------------------------------------------------------------------------

void cmd_fit1d(const ExperimentConfig& cfg) {
  cfg.validate(all_keys());

  ExperimentConfig data_cfg = cfg;
  if (!cfg.has("data.source")) data_cfg.set("data.source", "fig2");
  const Dataset ds = dataset_from_config(data_cfg);
  if (ds.features() != 1) {
    throw UsageError("fit1d needs one-dimensional data, got " + std::to_string(ds.features()) +
                     " features");
  }

  const int c = cfg.get_int("fit1d.c", 2);
  if (c != 1 && c != 2) throw UsageError("fit1d.c must be 1 or 2");
  const int segments = cfg.get_int("fit1d.segments", 5000);
  const double lambda = cfg.get_double("fit1d.lambda", 1e-5);
  const BreakGrid grid = BreakGrid::uniform(segments, cfg.get_double("saaf.lo", kDefaultGridLo),
                                            cfg.get_double("saaf.hi", kDefaultGridHi));

  const Saaf fitted = fit_saaf_ridge(ds.X.col(0), ds.t, Saaf(c, grid), lambda);

  const Eigen::VectorXd predictions =
      ds.X.col(0).unaryExpr([&fitted](double x) { return fitted(x); });
  const Metrics metrics = compute_metrics(predictions, ds.t);
  double max_w = 0.0;
  for (double w : fitted.w()) max_w = std::max(max_w, std::abs(w));

  const auto out = prepare_out_dir(cfg);

  std::ostringstream curve;
  curve << "x,f\n";
  const double lo = ds.X.col(0).minCoeff();
  const double hi = ds.X.col(0).maxCoeff();
  const int curve_points = 1000;
  for (int i = 0; i < curve_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (curve_points - 1);
    curve << format_double_impl(x) << ',' << format_double_impl(fitted(x)) << '\n';
  }
  write_file(out / "curve.csv", curve.str());

  write_json(out / "saaf.json", saaf_to_json(fitted));

  nlohmann::json smooth;
  smooth["c"] = c;
  smooth["segments"] = segments;
  smooth["lambda"] = lambda;
  smooth["n_points"] = ds.size();
  smooth["training_rmse"] = metrics.rmse;
  smooth["max_abs_cth_derivative"] = max_w;  // the c-th derivative on segment k is w_k
  write_json(out / "smoothness.json", smooth);

  std::cout << "fit1d: " << ds.size() << " points, " << segments << " segments, c=" << c
            << ", train RMSE " << metrics.rmse << ", max |f^(c)| " << max_w << "\n";
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

namespace {

struct TrainedRun {
  Network net;
  TrainReport report;
  Metrics test_metrics;
};

TrainedRun run_training(const ExperimentConfig& cfg) {
  const Dataset ds = dataset_from_config(cfg);
  const SplitIndices split = random_split(static_cast<int>(ds.size()),
                                          cfg.get_double("split.fraction", 0.8),
                                          derive_seed(cfg.get_seed(), "split"));
  const Dataset train_set = subset(ds, split.train);
  const Dataset test_set = subset(ds, split.test);

  TrainedRun run{init_network(layer_specs_from_config(cfg), static_cast<int>(ds.features()),
                              cfg.get_seed()),
                 {}, {}};
  run.report = train(run.net, train_set, &test_set, train_config_from_config(cfg));
  run.test_metrics = compute_metrics(predict(run.net, test_set.X), test_set.t);
  return run;
}

}  // namespace

void cmd_train(const ExperimentConfig& cfg) {
  cfg.validate(all_keys());
  const auto out = prepare_out_dir(cfg);

  TrainedRun run = run_training(cfg);

  save_network(run.net, (out / "network.json").string());

  nlohmann::json report;
  report["epochs"] = run.report.epochs_run;
  report["train_loss"] = run.report.train_loss;
  report["val_loss"] = run.report.val_loss;
  write_json(out / "train_report.json", report);

  write_file(out / "loss.csv", loss_curve_csv(run.report));
  write_json(out / "metrics.json", metrics_to_json(run.test_metrics));

  std::cout << "train: " << run.report.epochs_run << " epochs in " << run.report.wall_time_sec
            << " s, test RMSE " << run.test_metrics.rmse << "\n";
}

void cmd_eval(const ExperimentConfig& cfg) {
  cfg.validate(all_keys());
  const auto out = prepare_out_dir(cfg);

  const std::string net_path =
      cfg.get_string("eval.network", (out / "network.json").string());
  const Network net = load_network(net_path);

  const Dataset ds = dataset_from_config(cfg);
  if (ds.features() != net.input_dim) {
    throw UsageError("dataset has " + std::to_string(ds.features()) +
                     " features but the network expects " + std::to_string(net.input_dim));
  }
  const SplitIndices split = random_split(static_cast<int>(ds.size()),
                                          cfg.get_double("split.fraction", 0.8),
                                          derive_seed(cfg.get_seed(), "split"));
  const Dataset test_set = subset(ds, split.test);
  const Metrics metrics = compute_metrics(predict(net, test_set.X), test_set.t);

  write_json(out / "eval_metrics.json", metrics_to_json(metrics));
  std::cout << "eval: test RMSE " << metrics.rmse << " over " << test_set.size() << " samples\n";
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

void cmd_analyze(const ExperimentConfig& cfg) {
  cfg.validate(all_keys());
  const auto out = prepare_out_dir(cfg);

  const std::string net_path =
      cfg.get_string("analyze.network", (out / "network.json").string());
  const Network net = load_network(net_path);

  const double gamma = cfg.get_double("analyze.gamma", 0.5);
  const int pairs = cfg.get_int("analyze.pairs", 100000);
  const ComplexityReport report = analyze_network(
      net, gamma, pairs, derive_seed(cfg.get_seed(), "empirical-lipschitz"));

  nlohmann::json j;
  j["input_dim"] = report.input_dim;
  j["margin"] = report.margin;
  j["activation_lipschitz"] = report.activation_lipschitz;
  j["network_lipschitz_bound"] = report.network_bound;
  j["empirical_lipschitz"] = report.empirical_estimate;
  if (std::isinf(report.fat_shattering)) {
    j["fat_shattering_bound"] = "inf";
  } else {
    j["fat_shattering_bound"] = report.fat_shattering;
  }

  if (cfg.get_bool("analyze.diagnostic", false)) {
    const Dataset ds = dataset_from_config(cfg);
    const DiagnosticReport diag =
        conditional_expectation_diagnostic(net, ds, cfg.get_int("analyze.bins", 20));
    nlohmann::json dj;
    nlohmann::json per_neuron = nlohmann::json::array();
    for (std::size_t i = 0; i < diag.neurons.size(); ++i) {
      const NeuronDiagnostic& nd = diag.neurons[i];
      per_neuron.push_back(nd.correlation ? nlohmann::json(*nd.correlation)
                                          : nlohmann::json(nullptr));
      std::ostringstream csv;
      csv << "bin_center,mean_contribution,mean_target,count\n";
      for (std::size_t b = 0; b < nd.bin_centers.size(); ++b) {
        csv << format_double_impl(nd.bin_centers[b]) << ','
            << format_double_impl(nd.mean_contribution[b]) << ','
            << format_double_impl(nd.mean_target[b]) << ',' << nd.bin_counts[b] << '\n';
      }
      write_file(out / ("diagnostic_neuron_" + std::to_string(i) + ".csv"), csv.str());
    }
    dj["per_neuron_correlation"] = std::move(per_neuron);
    const auto mean_corr = diag.mean_correlation();
    dj["mean_correlation"] = mean_corr ? nlohmann::json(*mean_corr) : nlohmann::json(nullptr);
    j["diagnostic"] = std::move(dj);
  }

  write_json(out / "complexity.json", j);
  std::cout << "analyze: bound " << report.network_bound << ", empirical "
            << report.empirical_estimate << ", fat(" << gamma << ") = " << report.fat_shattering
            << "\n";
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

void cmd_bench(const ExperimentConfig& cfg) {
  cfg.validate(all_keys());
  const auto out = prepare_out_dir(cfg);

  const std::vector<std::string> activations =
      cfg.get_list("bench.activations", {"ReLU", "R-SAAFc1", "R-SAAFc2"});
  if (activations.size() < 2) {
    throw UsageError("bench needs at least two activation names");
  }
  for (const std::string& name : activations) parse_activation_name(name);  // fail fast

  const int k = cfg.get_int("bench.folds", 3);
  const Dataset ds = dataset_from_config(cfg);
  const auto folds =
      kfold_split(static_cast<int>(ds.size()), k, derive_seed(cfg.get_seed(), "split"));

  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "activation,rmse_mean,rmse_std,pearson_mean,pearson_std,folds_ok\n";

  for (const std::string& name : activations) {
    std::vector<double> rmse;
    std::vector<double> pearson;
    nlohmann::json fold_results = nlohmann::json::array();
    for (int f = 0; f < k; ++f) {
      try {
        std::vector<int> train_idx;
        for (int g = 0; g < k; ++g) {
          if (g == f) continue;
          train_idx.insert(train_idx.end(), folds[static_cast<std::size_t>(g)].begin(),
                           folds[static_cast<std::size_t>(g)].end());
        }
        const Dataset train_set = subset(ds, train_idx);
        const Dataset test_set = subset(ds, folds[static_cast<std::size_t>(f)]);

        ExperimentConfig fold_cfg = cfg;
        fold_cfg.set("net.activation", name);
        // the same per-fold seed for every activation, so runs differ only
        // in the activation function
        const std::uint64_t fold_seed =
            derive_seed(cfg.get_seed(), "fold-" + std::to_string(f));
        Network net = init_network(layer_specs_from_config(fold_cfg),
                                   static_cast<int>(ds.features()), fold_seed);
        TrainConfig tc = train_config_from_config(fold_cfg);
        tc.seed = fold_seed;
        train(net, train_set, nullptr, tc);

        const Metrics m = compute_metrics(predict(net, test_set.X), test_set.t);
        rmse.push_back(m.rmse);
        nlohmann::json fj = metrics_to_json(m);
        fj["fold"] = f;
        fold_results.push_back(std::move(fj));
        if (m.pearson) pearson.push_back(*m.pearson);
      } catch (const std::exception& e) {
        std::cerr << "warning: " << name << " fold " << f << " failed: " << e.what() << "\n";
        nlohmann::json fj;
        fj["fold"] = f;
        fj["error"] = e.what();
        fold_results.push_back(std::move(fj));
      }
    }

    auto mean_std = [](const std::vector<double>& xs) -> std::pair<double, double> {
      if (xs.empty()) return {NAN, NAN};
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      if (xs.size() == 1) return {mean, 0.0};
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
    };
    const auto [rmse_mean, rmse_std] = mean_std(rmse);
    const auto [p_mean, p_std] = mean_std(pearson);

    nlohmann::json row;
    row["activation"] = name;
    row["folds"] = std::move(fold_results);
    row["folds_ok"] = rmse.size();
    row["rmse_mean"] = rmse.empty() ? nlohmann::json(nullptr) : nlohmann::json(rmse_mean);
    row["rmse_std"] = rmse.empty() ? nlohmann::json(nullptr) : nlohmann::json(rmse_std);
    row["pearson_mean"] = pearson.empty() ? nlohmann::json(nullptr) : nlohmann::json(p_mean);
    row["pearson_std"] = pearson.empty() ? nlohmann::json(nullptr) : nlohmann::json(p_std);
    rows.push_back(std::move(row));

    csv << name << ',' << (rmse.empty() ? "" : format_double_impl(rmse_mean)) << ','
        << (rmse.empty() ? "" : format_double_impl(rmse_std)) << ','
        << (pearson.empty() ? "" : format_double_impl(p_mean)) << ','
        << (pearson.empty() ? "" : format_double_impl(p_std)) << ',' << rmse.size() << '\n';

    char mean_str[32];
    std::snprintf(mean_str, sizeof(mean_str), "%.4f", rmse_mean);
    std::cout << "bench: " << name << " rmse " << (rmse.empty() ? "n/a" : mean_str) << " over "
              << rmse.size() << "/" << k << " folds\n";
  }

  nlohmann::json j;
  j["folds"] = k;
  j["results"] = std::move(rows);
  write_json(out / "bench.json", j);
  write_file(out / "bench.csv", csv.str());
}

}  // namespace saaf::cli

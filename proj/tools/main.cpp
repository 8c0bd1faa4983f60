#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "saaf/cli.hpp"
#include "saaf/config.hpp"
#include "saaf/errors.hpp"

namespace {

struct FlagValues {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> activation;
  std::optional<int> segments;
  std::optional<int> c;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<int> folds;
  bool diagnostic = false;
};

void add_common_flags(CLI::App* cmd, FlagValues& flags) {
  cmd->add_option("--config", flags.config_path, "Config file (flat key = value lines)");
  cmd->add_option("--seed", flags.seed, "Root seed; all randomness derives from it");
  cmd->add_option("--out", flags.out, "Output directory (default: out)");
}

saaf::ExperimentConfig build_config(const FlagValues& flags, const std::string& command) {
  saaf::ExperimentConfig cfg;
  if (flags.config_path) cfg = saaf::ExperimentConfig::load(*flags.config_path);
  // flags win over config-file values
  if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
  if (flags.out) cfg.set("out", *flags.out);
  if (flags.activation) cfg.set("net.activation", *flags.activation);
  if (flags.segments) {
    cfg.set(command == "fit1d" ? "fit1d.segments" : "saaf.segments",
            std::to_string(*flags.segments));
  }
  if (flags.c) cfg.set("fit1d.c", std::to_string(*flags.c));
  if (flags.lambda) {
    cfg.set(command == "fit1d" ? "fit1d.lambda" : "train.lambda",
            saaf::cli::format_double(*flags.lambda));
  }
  if (flags.gamma) cfg.set("analyze.gamma", saaf::cli::format_double(*flags.gamma));
  if (flags.folds) cfg.set("bench.folds", std::to_string(*flags.folds));
  if (flags.diagnostic) cfg.set("analyze.diagnostic", "true");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-polynomial adaptive activation experiments"};
  app.require_subcommand(1);

  FlagValues flags;
  std::string command;
  std::function<void(const saaf::ExperimentConfig&)> action;

  CLI::App* fit1d = app.add_subcommand(
      "fit1d", "Ridge-fit a single SAAF to 1-D data; writes curve.csv, saaf.json");
  add_common_flags(fit1d, flags);
  fit1d->add_option("--segments", flags.segments, "Number of polynomial segments");
  fit1d->add_option("--c", flags.c, "Polynomial degree (1 or 2)");
  fit1d->add_option("--lambda", flags.lambda, "L2 regularization strength");
  fit1d->callback([&] {
    command = "fit1d";
    action = saaf::cli::cmd_fit1d;
  });

  CLI::App* train = app.add_subcommand("train", "Train a regression network");
  add_common_flags(train, flags);
  train->add_option("--activation", flags.activation,
                    "Activation name (ReLU, LReLU, PReLU, APLU, SAAFc1, SAAFc2; R- prefix "
                    "restricts it to the regression layer)");
  train->add_option("--segments", flags.segments, "SAAF segment count");
  train->add_option("--lambda", flags.lambda, "L2 regularization strength");
  train->callback([&] {
    command = "train";
    action = saaf::cli::cmd_train;
  });

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved network on the test split");
  add_common_flags(eval, flags);
  eval->callback([&] {
    command = "eval";
    action = saaf::cli::cmd_eval;
  });

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Lipschitz and fat-shattering report for a saved network");
  add_common_flags(analyze, flags);
  analyze->add_option("--gamma", flags.gamma, "Margin scale for the fat-shattering bound");
  analyze->add_flag("--diagnostic", flags.diagnostic,
                    "Also write per-neuron conditional-expectation diagnostics");
  analyze->callback([&] {
    command = "analyze";
    action = saaf::cli::cmd_analyze;
  });

  CLI::App* bench = app.add_subcommand(
      "bench", "Compare activations on identical architectures over k folds");
  add_common_flags(bench, flags);
  bench->add_option("--activation", flags.activation, "Single activation override");
  bench->add_option("--segments", flags.segments, "SAAF segment count");
  bench->add_option("--lambda", flags.lambda, "L2 regularization strength");
  bench->add_option("--folds", flags.folds, "Number of cross-validation folds");
  bench->callback([&] {
    command = "bench";
    action = saaf::cli::cmd_bench;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action(build_config(flags, command));
  } catch (const saaf::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

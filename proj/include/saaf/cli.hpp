#pragma once

#include <string>

#include "saaf/config.hpp"

namespace saaf::cli {

// Experiment commands behind the saafnet binary. Each command reads its
// settings from the flat config (see ExperimentConfig), writes its outputs
// under the `out` directory and throws UsageError / NumericError / DataError
// on failure; the binary maps those to exit codes 2 and 1.
//
// Every command is deterministic given config + seed: rerunning overwrites
// the output files byte-identically. Timing goes to stdout only.

/// Ridge-fits a single SAAF to one-dimensional data (the 21-point task by
/// default). Writes curve.csv (1000 samples), saaf.json and smoothness.json.
void cmd_fit1d(const ExperimentConfig& cfg);

/// Trains a network and writes network.json, train_report.json, loss.csv and
/// metrics.json (test split).
void cmd_train(const ExperimentConfig& cfg);

/// Evaluates a persisted network on the config's test split; writes
/// eval_metrics.json.
void cmd_eval(const ExperimentConfig& cfg);

/// Computes the complexity report for a persisted network; writes
/// complexity.json, plus per-neuron diagnostic CSVs when analyze.diagnostic
/// is set.
void cmd_analyze(const ExperimentConfig& cfg);

/// Trains the same architecture once per activation name over k folds with
/// shared seeds; writes bench.csv and bench.json. Individual run failures
/// leave gaps in the table instead of aborting.
void cmd_bench(const ExperimentConfig& cfg);

/// Shortest decimal representation that reparses to the identical double.
std::string format_double(double value);

}  // namespace saaf::cli

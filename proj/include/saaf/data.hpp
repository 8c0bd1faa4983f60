#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace saaf {

/// Rows of X are samples; t holds one regression target per row.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd t;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index features() const { return X.cols(); }
};

/// The 21-point one-dimensional fitting task: x equally spaced on [-1, 1],
/// t = sin(pi x) + N(0, sigma^2) noise with sigma = 0.05.
Dataset gen_fig2(std::uint64_t seed, double noise_sigma = 0.05);

enum class AdditiveLibrary {
  kSmooth,  // cycle of sin(pi x), x^2, tanh(3x)
  kLinear,  // fixed linear coefficients, for closed-form checks
};

/// Additive synthetic regression data: m features i.i.d. uniform on [-1, 1],
/// t = sum_i g_i(x_i) + N(0, 0.1^2).
Dataset gen_additive(int n, int m, std::uint64_t seed,
                     AdditiveLibrary library = AdditiveLibrary::kSmooth);

struct CsvReport {
  std::vector<int> rejected_lines;  // 1-based line numbers of dropped rows
};

/// Loads a comma-separated file with a mandatory header row. Every column
/// except `target_column` becomes a feature. Rows with missing, unparseable
/// or non-finite cells are dropped and reported through `report`.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 CsvReport* report = nullptr);

enum class NormalizeMode { kMinMaxToGrid, kZScore };

/// Invertible per-feature affine transform fitted by `normalize`.
struct FeatureTransform {
  NormalizeMode mode = NormalizeMode::kMinMaxToGrid;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;  // 0 marks a constant feature (maps to 0)
  std::vector<int> constant_features;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& X) const;
};

/// Fits and applies the transform. kMinMaxToGrid maps each feature range onto
/// [-1, 1] so inputs land inside the default activation break grid; kZScore
/// standardizes. Constant features map to zero and are listed in the
/// transform.
std::pair<Dataset, FeatureTransform> normalize(const Dataset& ds, NormalizeMode mode);

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> pearson;  // absent when either side has zero variance
};

Metrics compute_metrics(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

/// Random disjoint train/test split; train gets round(fraction * n) samples.
SplitIndices random_split(int n, double fraction, std::uint64_t seed);

/// k disjoint covering folds with sizes differing by at most one.
std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed);

Dataset subset(const Dataset& ds, const std::vector<int>& indices);

}  // namespace saaf

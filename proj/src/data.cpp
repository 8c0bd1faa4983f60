#include "saaf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "saaf/errors.hpp"
#include "saaf/rng.hpp"

namespace saaf {

Dataset gen_fig2(std::uint64_t seed, double noise_sigma) {
  const int n = 21;
  Rng rng(seed);
  Dataset ds;
  ds.X.resize(n, 1);
  ds.t.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    ds.X(i, 0) = x;
    ds.t(i) = std::sin(M_PI * x) + (noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0);
  }
  ds.X(0, 0) = -1.0;
  ds.X(n - 1, 0) = 1.0;
  ds.feature_names = {"x"};
  return ds;
}

namespace {

double additive_term(AdditiveLibrary library, int feature, double x) {
  if (library == AdditiveLibrary::kLinear) {
    static constexpr double kCoef[3] = {1.5, -2.0, 0.7};
    return kCoef[feature % 3] * x;
  }
  switch (feature % 3) {
    case 0: return std::sin(M_PI * x);
    case 1: return x * x;
    default: return std::tanh(3.0 * x);  // soft step
  }
}

}  // namespace

Dataset gen_additive(int n, int m, std::uint64_t seed, AdditiveLibrary library) {
  if (n < 1 || m < 1) throw UsageError("gen_additive needs n >= 1 and m >= 1");
  Rng rng(seed);
  Dataset ds;
  ds.X.resize(n, m);
  ds.t.resize(n);
  ds.feature_names.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    ds.feature_names[static_cast<std::size_t>(j)] = "x" + std::to_string(j);
  }
  for (int i = 0; i < n; ++i) {
    double target = 0.0;
    for (int j = 0; j < m; ++j) {
      const double x = rng.uniform(-1.0, 1.0);
      ds.X(i, j) = x;
      target += additive_term(library, j, x);
    }
    ds.t(i) = target + rng.normal(0.0, 0.1);
  }
  return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_cell(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return false;
  return std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column, CsvReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV file is empty: " + path);
  const auto header = split_csv_line(line);
  if (header.empty()) throw DataError("CSV header row is empty: " + path);

  int target_idx = -1;
  std::vector<std::string> feature_names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == target_column) {
      target_idx = static_cast<int>(i);
    } else {
      feature_names.push_back(name);
    }
  }
  if (target_idx < 0) {
    std::string available;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) available += ", ";
      available += trim(header[i]);
    }
    throw UsageError("target column '" + target_column + "' not found; available columns: " +
                     available);
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> rejected;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> values;
    bool ok = cells.size() == header.size();
    if (ok) {
      values.reserve(cells.size());
      for (const auto& cell : cells) {
        double v = 0.0;
        if (!parse_cell(cell, v)) {
          ok = false;
          break;
        }
        values.push_back(v);
      }
    }
    if (ok) {
      rows.push_back(std::move(values));
    } else {
      rejected.push_back(line_no);
    }
  }
  if (report) report->rejected_lines = rejected;
  if (rows.empty()) {
    throw DataError("no usable rows in " + path + " (" + std::to_string(rejected.size()) +
                    " rejected)");
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(header.size()) - 1;
  ds.X.resize(n, m);
  ds.t.resize(n);
  ds.feature_names = std::move(feature_names);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < rows[static_cast<std::size_t>(i)].size(); ++j) {
      const double v = rows[static_cast<std::size_t>(i)][j];
      if (static_cast<int>(j) == target_idx) {
        ds.t(i) = v;
      } else {
        ds.X(i, col++) = v;
      }
    }
  }
  return ds;
}

Eigen::MatrixXd FeatureTransform::apply(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (scale(j) == 0.0) {
      out.col(j).setZero();
    } else {
      out.col(j) = (X.col(j).array() - center(j)) / scale(j);
    }
  }
  return out;
}

Eigen::MatrixXd FeatureTransform::invert(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    // constant features invert to their original (center) value
    out.col(j) = X.col(j).array() * scale(j) + center(j);
  }
  return out;
}

std::pair<Dataset, FeatureTransform> normalize(const Dataset& ds, NormalizeMode mode) {
  FeatureTransform tr;
  tr.mode = mode;
  const Eigen::Index m = ds.features();
  tr.center.resize(m);
  tr.scale.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (mode == NormalizeMode::kMinMaxToGrid) {
      const double lo = ds.X.col(j).minCoeff();
      const double hi = ds.X.col(j).maxCoeff();
      tr.center(j) = 0.5 * (lo + hi);
      tr.scale(j) = 0.5 * (hi - lo);
    } else {
      const double mean = ds.X.col(j).mean();
      const double var = (ds.X.col(j).array() - mean).square().mean();
      tr.center(j) = mean;
      tr.scale(j) = std::sqrt(var);
    }
    if (tr.scale(j) == 0.0) {
      tr.constant_features.push_back(static_cast<int>(j));
    }
  }
  Dataset out = ds;
  out.X = tr.apply(ds.X);
  return {std::move(out), std::move(tr)};
}

Metrics compute_metrics(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
  if (predictions.size() == 0 || predictions.size() != targets.size()) {
    throw UsageError("metrics need equal, non-empty prediction/target vectors");
  }
  Metrics m;
  const Eigen::ArrayXd diff = (predictions - targets).array();
  m.rmse = std::sqrt(diff.square().mean());
  m.mae = diff.abs().mean();

  const double mp = predictions.mean();
  const double mt = targets.mean();
  const Eigen::ArrayXd dp = predictions.array() - mp;
  const Eigen::ArrayXd dt = targets.array() - mt;
  const double sp = std::sqrt(dp.square().sum());
  const double st = std::sqrt(dt.square().sum());
  if (sp > 0.0 && st > 0.0) {
    m.pearson = (dp * dt).sum() / (sp * st);
  }
  return m;
}

SplitIndices random_split(int n, double fraction, std::uint64_t seed) {
  if (n < 2) throw UsageError("random_split needs at least two samples");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw UsageError("random_split fraction must lie in (0, 1)");
  }
  auto train_n = static_cast<int>(std::llround(fraction * n));
  train_n = std::clamp(train_n, 1, n - 1);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + train_n);
  split.test.assign(order.begin() + train_n, order.end());
  return split;
}

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2) throw UsageError("kfold needs k >= 2");
  if (k > n) throw UsageError("kfold needs k <= number of samples");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    folds[static_cast<std::size_t>(i % k)].push_back(order[static_cast<std::size_t>(i)]);
  }
  return folds;
}

Dataset subset(const Dataset& ds, const std::vector<int>& indices) {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), ds.features());
  out.t.resize(static_cast<Eigen::Index>(indices.size()));
  out.feature_names = ds.feature_names;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(indices[i]);
    out.t(static_cast<Eigen::Index>(i)) = ds.t(indices[i]);
  }
  return out;
}

}  // namespace saaf

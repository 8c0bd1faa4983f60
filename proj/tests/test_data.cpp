#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "saaf/data.hpp"
#include "saaf/errors.hpp"

using namespace saaf;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = (std::filesystem::temp_directory_path() /
            ("saaf_data_test_" + std::to_string(++counter) + ".csv"))
               .string();
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("gen_fig2 layout and determinism") {
  const Dataset ds = gen_fig2(5);
  REQUIRE(ds.size() == 21);
  CHECK(ds.X(0, 0) == -1.0);
  CHECK(ds.X(20, 0) == 1.0);
  const Dataset again = gen_fig2(5);
  CHECK(ds.X == again.X);
  CHECK(ds.t == again.t);
  const Dataset other = gen_fig2(6);
  CHECK(ds.t != other.t);
}

TEST_CASE("gen_additive features are nearly uncorrelated") {
  const Dataset ds = gen_additive(10000, 3, 9);
  REQUIRE(ds.size() == 10000);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const Metrics m = compute_metrics(ds.X.col(a), ds.X.col(b));
      REQUIRE(m.pearson.has_value());
      CHECK(std::abs(*m.pearson) < 0.05);
    }
  }
  const Dataset again = gen_additive(10000, 3, 9);
  CHECK(ds.t == again.t);
}

TEST_CASE("gen_additive linear library is solvable by an affine model") {
  const Dataset ds = gen_additive(4000, 3, 11, AdditiveLibrary::kLinear);
  // closed-form least squares on [X, 1]
  Eigen::MatrixXd design(ds.size(), 4);
  design.leftCols(3) = ds.X;
  design.col(3).setOnes();
  const Eigen::VectorXd beta =
      (design.transpose() * design).ldlt().solve(design.transpose() * ds.t);
  const double rmse = std::sqrt((design * beta - ds.t).squaredNorm() / ds.size());
  CHECK(rmse == doctest::Approx(0.1).epsilon(0.1));  // the noise floor
}

TEST_CASE("load_csv basics") {
  TempFile file("x,y,t\n1,2,3\n4,5,6\n");
  const Dataset ds = load_csv(file.path, "t");
  REQUIRE(ds.size() == 2);
  REQUIRE(ds.features() == 2);
  CHECK(ds.X(1, 1) == 5.0);
  CHECK(ds.t(1) == 6.0);
  CHECK(ds.feature_names == std::vector<std::string>{"x", "y"});
}

TEST_CASE("load_csv missing target names the available columns") {
  TempFile file("a,b\n1,2\n");
  try {
    load_csv(file.path, "t");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects bad rows with line numbers") {
  TempFile file("x,t\n1,2\nNaN,3\n4,oops\n5,6\n7\n");
  CsvReport report;
  const Dataset ds = load_csv(file.path, "t", &report);
  CHECK(ds.size() == 2);
  CHECK(report.rejected_lines == std::vector<int>{3, 4, 6});

  TempFile empty("x,t\nbad,1\n");
  CHECK_THROWS_AS(load_csv(empty.path, "t"), DataError);
}

TEST_CASE("minmax normalization maps onto [-1, 1] and inverts") {
  Dataset ds;
  ds.X.resize(3, 2);
  ds.X << 0.0, 5.0, 10.0, 5.0, 5.0, 5.0;
  ds.t = Eigen::VectorXd::Zero(3);

  auto [scaled, tr] = normalize(ds, NormalizeMode::kMinMaxToGrid);
  CHECK(scaled.X(0, 0) == doctest::Approx(-1.0));
  CHECK(scaled.X(1, 0) == doctest::Approx(1.0));
  CHECK(scaled.X(2, 0) == doctest::Approx(0.0));
  // constant column goes to zero and is flagged
  CHECK(scaled.X.col(1).isZero());
  CHECK(tr.constant_features == std::vector<int>{1});

  const Eigen::MatrixXd round_trip = tr.invert(tr.apply(ds.X));
  CHECK((round_trip.col(0) - ds.X.col(0)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("zscore normalization standardizes") {
  Dataset ds;
  ds.X.resize(4, 1);
  ds.X << 1.0, 2.0, 3.0, 4.0;
  ds.t = Eigen::VectorXd::Zero(4);
  auto [scaled, tr] = normalize(ds, NormalizeMode::kZScore);
  CHECK(scaled.X.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(scaled.X.col(0).squaredNorm() / 4.0 == doctest::Approx(1.0));
  const Eigen::MatrixXd back = tr.invert(scaled.X);
  CHECK((back - ds.X).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("metrics") {
  Eigen::VectorXd y(3), t(3);
  y << 1.0, 2.0, 3.0;
  t << 1.0, 2.0, 3.0;
  const Metrics same = compute_metrics(y, t);
  CHECK(same.rmse == 0.0);
  CHECK(same.mae == 0.0);
  REQUIRE(same.pearson.has_value());
  CHECK(*same.pearson == doctest::Approx(1.0));

  const Metrics negated = compute_metrics(y, (-y).eval());
  REQUIRE(negated.pearson.has_value());
  CHECK(*negated.pearson == doctest::Approx(-1.0));

  Eigen::VectorXd y2(2), t2(2);
  y2 << 0.0, 0.0;
  t2 << 0.0, 2.0;
  const Metrics m = compute_metrics(y2, t2);
  CHECK(m.rmse == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(m.pearson.has_value());  // zero-variance predictions

  CHECK_THROWS_AS(compute_metrics(y, t2), UsageError);
  CHECK_THROWS_AS(compute_metrics(Eigen::VectorXd(), Eigen::VectorXd()), UsageError);
}

TEST_CASE("metrics are invariant under joint permutation") {
  Eigen::VectorXd y(4), t(4);
  y << 1.0, -2.0, 0.5, 3.0;
  t << 0.5, -1.0, 0.25, 2.0;
  Eigen::VectorXd yp(4), tp(4);
  const int perm[4] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) {
    yp(i) = y(perm[i]);
    tp(i) = t(perm[i]);
  }
  const Metrics a = compute_metrics(y, t);
  const Metrics b = compute_metrics(yp, tp);
  CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-15));
  CHECK(a.mae == doctest::Approx(b.mae).epsilon(1e-15));
  CHECK(*a.pearson == doctest::Approx(*b.pearson).epsilon(1e-15));
}

TEST_CASE("random split") {
  const SplitIndices s = random_split(10, 0.8, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  std::vector<bool> seen(10, false);
  for (int i : s.train) seen[static_cast<std::size_t>(i)] = true;
  for (int i : s.test) {
    CHECK_FALSE(seen[static_cast<std::size_t>(i)]);  // disjoint
    seen[static_cast<std::size_t>(i)] = true;
  }
  for (bool b : seen) CHECK(b);  // covering

  const SplitIndices again = random_split(10, 0.8, 3);
  CHECK(s.train == again.train);
  CHECK_THROWS_AS(random_split(10, 0.0, 3), UsageError);
  CHECK_THROWS_AS(random_split(10, 1.0, 3), UsageError);
}

TEST_CASE("kfold split") {
  const auto folds = kfold_split(9, 3, 4);
  REQUIRE(folds.size() == 3);
  std::vector<bool> seen(9, false);
  for (const auto& fold : folds) {
    CHECK(fold.size() == 3);
    for (int i : fold) {
      CHECK_FALSE(seen[static_cast<std::size_t>(i)]);
      seen[static_cast<std::size_t>(i)] = true;
    }
  }
  for (bool b : seen) CHECK(b);
  CHECK(kfold_split(9, 3, 4) == folds);
  CHECK_THROWS_AS(kfold_split(2, 3, 4), UsageError);
}

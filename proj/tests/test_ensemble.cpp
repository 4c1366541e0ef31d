#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "spfp/ensemble.hpp"
#include "spfp/errors.hpp"

using namespace spfp;
namespace fs = std::filesystem;

namespace {

Dataset make(const Eigen::MatrixXd& x, std::vector<Code> y, std::size_t k) {
  std::vector<std::string> names, classes;
  for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j));
  for (std::size_t c = 0; c < k; ++c) classes.push_back(std::to_string(c));
  return make_dataset(x, names, std::move(y), classes);
}

Eigen::MatrixXd random_design(std::mt19937_64& gen, int n, int d) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, d + 1);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j <= d; ++j) x(i, j) = nd(gen);
  }
  return x;
}

}  // namespace

TEST(Softmax, RowsSumToOneAndSurviveLargeLogits) {
  Eigen::MatrixXd z(2, 3);
  z << 1000, 1001, 999, -5, 0, 5;
  const ProbMatrix p = softmax_rows(z);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
  EXPECT_TRUE(p.allFinite());
  EXPECT_GT(p(0, 1), p(0, 0));
}

TEST(LogisticGradient, MatchesCentralDifferences) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 15 + trial, d = 1 + trial % 4, k = 2 + trial % 3;
    const Eigen::MatrixXd x = random_design(gen, n, d);
    std::vector<Code> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % k;
    Eigen::MatrixXd w(d + 1, k);
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < k; ++c) w(r, c) = 0.3 * nd(gen);
    }
    const double l2 = 0.01 * trial;
    const auto lg = logistic_loss_gradient(w, x, y, l2);
    const double h = 1e-6;
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < k; ++c) {
        Eigen::MatrixXd wp = w, wm = w;
        wp(r, c) += h;
        wm(r, c) -= h;
        const double fd = (logistic_loss_gradient(wp, x, y, l2).loss -
                           logistic_loss_gradient(wm, x, y, l2).loss) / (2 * h);
        EXPECT_NEAR(lg.gradient(r, c), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(TrainBuiltin, SeparableTwoFeatureToyFitsPerfectly) {
  Eigen::MatrixXd x(8, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1, 3, 3, 3, 4, 4, 3, 4, 4;
  const Dataset d = make(x, {0, 0, 0, 0, 1, 1, 1, 1}, 2);
  const std::vector<std::size_t> ids{0, 1};
  const ProbModel m = train_builtin(d, ids);
  const ProbMatrix p = m.predict_proba(d.features);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(p(i, 1) > 0.5, d.target[static_cast<std::size_t>(i)] == 1);
}

TEST(TrainBuiltin, NoiseLabelsGivePriorProbabilities) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> nd;
  const int n = 400;
  Eigen::MatrixXd x(n, 2);
  std::vector<Code> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = nd(gen);
    x(i, 1) = nd(gen);
    y[static_cast<std::size_t>(i)] = i % 2;
  }
  const Dataset d = make(x, y, 2);
  const std::vector<std::size_t> ids{0, 1};
  const ProbMatrix p = train_builtin(d, ids).predict_proba(d.features);
  EXPECT_NEAR(p.col(0).mean(), 0.5, 0.05);
  EXPECT_NEAR(p.col(1).mean(), 0.5, 0.05);
}

TEST(TrainBuiltin, DeterministicAndHandlesConstantColumn) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(60, 3);
  std::vector<Code> y(60);
  for (int i = 0; i < 60; ++i) {
    x(i, 0) = nd(gen);
    x(i, 1) = 2.0;
    x(i, 2) = nd(gen);
    y[static_cast<std::size_t>(i)] = x(i, 0) + 0.3 * nd(gen) > 0 ? (x(i, 2) > 0 ? 2 : 1) : 0;
  }
  const Dataset d = make(x, y, 3);
  const std::vector<std::size_t> ids{0, 1, 2};
  const ProbModel a = train_builtin(d, ids, {1e-3, 300, 1e-6, 1});
  const ProbModel b = train_builtin(d, ids, {1e-3, 300, 1e-6, 99});
  EXPECT_TRUE(a.weights == b.weights);
  const ProbMatrix p = a.predict_proba(d.features);
  EXPECT_TRUE(p.allFinite());
  for (int i = 0; i < 60; ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
}

TEST(TrainBuiltin, SingleClassTrainingIsRejected) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const Dataset d = make(x, {0, 0, 0}, 1);
  const std::vector<std::size_t> ids{0};
  EXPECT_THROW(train_builtin(d, ids), DataError);
}

TEST(EnsemblePredict, SpecExamples) {
  ProbMatrix a(1, 2), b(1, 2);
  a << 1, 0;
  b << 0, 1;
  std::vector<ProbMatrix> members{a, b};
  const std::vector<double> weighted{0.8, 0.2};
  const auto out = ensemble_predict(members, weighted);
  EXPECT_NEAR(out.proba(0, 0), 0.8, 1e-12);
  EXPECT_NEAR(out.proba(0, 1), 0.2, 1e-12);

  const std::vector<double> equal{0.7, 0.7};
  const auto avg = ensemble_predict(members, equal);
  EXPECT_NEAR(avg.proba(0, 0), 0.5, 1e-12);

  const std::vector<ProbMatrix> single{a};
  const std::vector<double> one{0.6};
  EXPECT_TRUE(ensemble_predict(single, one).proba == a);
  EXPECT_THROW(ensemble_predict(std::span<const ProbMatrix>{}, std::span<const double>{}),
               std::invalid_argument);
  ProbMatrix c(1, 3);
  c << 0.2, 0.3, 0.5;
  const std::vector<ProbMatrix> mismatch{a, c};
  EXPECT_THROW(ensemble_predict(mismatch, equal), std::invalid_argument);
}

TEST(EnsemblePredict, WeightsNormalizeAndPermutationInvariant) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 4, rows = 5, c = 3;
    std::vector<ProbMatrix> members;
    std::vector<double> aucs;
    for (int m = 0; m < k; ++m) {
      ProbMatrix p(rows, c);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < c; ++j) p(i, j) = u(gen);
        p.row(i) /= p.row(i).sum();
      }
      members.push_back(p);
      aucs.push_back(u(gen));
    }
    const auto out = ensemble_predict(members, aucs);
    double wsum = 0;
    for (const double w : out.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    for (int i = 0; i < rows; ++i) EXPECT_NEAR(out.proba.row(i).sum(), 1.0, 1e-9);
    std::reverse(members.begin(), members.end());
    std::reverse(aucs.begin(), aucs.end());
    EXPECT_TRUE(out.proba.isApprox(ensemble_predict(members, aucs).proba, 1e-14));
  }
}

TEST(EnsemblePredict, ZeroAucMemberIsExcluded) {
  ProbMatrix a(1, 2), b(1, 2);
  a << 0.9, 0.1;
  b << 0.1, 0.9;
  const std::vector<ProbMatrix> members{a, b};
  const std::vector<double> aucs{0.7, 0.0};
  const auto out = ensemble_predict(members, aucs);
  EXPECT_EQ(out.excluded, (std::vector<std::size_t>{1}));
  EXPECT_NEAR(out.proba(0, 0), 0.9, 1e-12);
}

TEST(ProbaCsv, RoundTripAndReorder) {
  const fs::path dir = fs::temp_directory_path() / "spfp_proba_tests";
  fs::create_directories(dir);
  ProbMatrix p(3, 2);
  p << 0.25, 0.75, 0.5, 0.5, 1.0, 0.0;
  const std::vector<std::size_t> ids{4, 9, 2};
  write_proba_csv(dir / "m.csv", p, ids);
  const std::vector<std::size_t> order{2, 4, 9};
  const ProbMatrix back = read_proba_csv(dir / "m.csv", 2, order);
  EXPECT_DOUBLE_EQ(back(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(back(1, 1), 0.75);
}

TEST(ProbaCsv, BadRowSumNamesFileAndRow) {
  const fs::path dir = fs::temp_directory_path() / "spfp_proba_tests";
  fs::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "row_id,class_0,class_1\n0,0.5,0.5\n1,0.7,0.7\n";
  const std::vector<std::size_t> ids{0, 1};
  try {
    read_proba_csv(dir / "bad.csv", 2, ids);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  }
  std::ofstream(dir / "three.csv") << "row_id,class_0,class_1,class_2\n0,0.2,0.3,0.5\n";
  const std::vector<std::size_t> one{0};
  EXPECT_THROW(read_proba_csv(dir / "three.csv", 2, one), DataError);
}

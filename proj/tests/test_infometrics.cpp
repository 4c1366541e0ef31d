#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spfp/infometrics.hpp"

using namespace spfp;
using Col = std::vector<Code>;

namespace {

Col random_column(std::mt19937_64& gen, std::size_t n, int card) {
  std::uniform_int_distribution<int> d(0, card - 1);
  Col c(n);
  for (auto& v : c) v = d(gen);
  return c;
}

}  // namespace

TEST(Entropy, SpecExamples) {
  EXPECT_DOUBLE_EQ(entropy(Col{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(entropy(Col{0, 0, 0, 0}), 0.0);
  const std::vector<std::size_t> counts{3, 1};
  EXPECT_NEAR(entropy_from_counts(counts), 0.8112781, 1e-7);
  EXPECT_THROW(entropy(Col{}), std::invalid_argument);
}

TEST(JointEntropy, SpecExamples) {
  EXPECT_DOUBLE_EQ(joint_entropy(Col{0, 1, 0, 1}, Col{0, 1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(joint_entropy(Col{0, 0, 1, 1}, Col{0, 1, 0, 1}), 2.0);
  EXPECT_DOUBLE_EQ(joint_entropy(Col{0, 0, 1, 1}, Col{0, 1, 1, 1}), 1.5);
  EXPECT_THROW(joint_entropy(Col{0, 1}, Col{0}), std::invalid_argument);
}

TEST(ConditionalEntropy, SpecExamples) {
  const Col x{0, 0, 1, 1};
  EXPECT_NEAR(conditional_entropy(x, x), 0.0, 1e-12);
  EXPECT_NEAR(conditional_entropy(x, Col{0, 1, 0, 1}), 1.0, 1e-12);
  EXPECT_NEAR(conditional_entropy(x, Col{0, 1, 1, 1}), 0.6887219, 1e-7);
}

TEST(MutualInformation, SpecExamples) {
  EXPECT_DOUBLE_EQ(mutual_information(Col{0, 1, 0, 1}, Col{0, 1, 0, 1}), 1.0);
  EXPECT_NEAR(mutual_information(Col{0, 0, 1, 1}, Col{0, 1, 0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(mutual_information(Col{0, 0, 1, 1}, Col{0, 1, 1, 1}), 0.3112781, 1e-7);
}

TEST(ConditionalMutualInformation, SpecExamples) {
  const Col x{0, 0, 1, 1}, y{0, 1, 0, 1}, xo{0, 1, 1, 0};
  EXPECT_NEAR(conditional_mutual_information(x, Col{0, 1, 1, 1}, Col{5, 5, 5, 5}),
              mutual_information(x, Col{0, 1, 1, 1}), 1e-12);
  EXPECT_NEAR(conditional_mutual_information(x, y, xo), 1.0, 1e-12);
  EXPECT_NEAR(conditional_mutual_information(x, x, x), 0.0, 1e-12);
}

TEST(InteractionGain, SpecExamples) {
  const Col x{0, 0, 1, 1}, y{0, 1, 0, 1}, xo{0, 1, 1, 0};
  EXPECT_NEAR(interaction_gain(x, y, xo), -1.0, 1e-12);
  // A constant target leaves I(X;X|Z) = I(X;X), so the gain vanishes.
  EXPECT_NEAR(interaction_gain(x, x, Col{0, 0, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(mutual_information(x, x), entropy(x), 1e-12);
  const Col a{0, 0, 0, 0, 1, 1, 1, 1}, b{0, 0, 1, 1, 0, 0, 1, 1}, c{0, 1, 0, 1, 0, 1, 0, 1};
  EXPECT_NEAR(interaction_gain(a, b, c), 0.0, 1e-12);
}

TEST(PearsonAbs, SpecExamples) {
  const std::vector<double> x{1, 2, 4, 8}, neg{-1, -2, -4, -8}, c{3, 3, 3, 3};
  EXPECT_NEAR(pearson_abs(x, x), 1.0, 1e-12);
  EXPECT_NEAR(pearson_abs(x, neg), 1.0, 1e-12);
  EXPECT_EQ(pearson_abs(c, x), 0.0);
  EXPECT_THROW(pearson_abs(x, std::span<const double>(c).subspan(0, 2)), std::invalid_argument);
}

TEST(PearsonAbs, EigenOverloadMatchesOracle) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  Eigen::VectorXd a(30), b(30);
  for (int i = 0; i < 30; ++i) {
    a(i) = nd(gen);
    b(i) = 0.5 * a(i) + nd(gen);
  }
  EXPECT_NEAR(pearson_abs(a, b),
              oracle::pearson_abs({a.data(), a.data() + 30}, {b.data(), b.data() + 30}), 1e-12);
}

TEST(RowPartition, SpecExamples) {
  const auto p1 = RowPartition::trivial(4).refine(Col{0, 1, 0, 1});
  EXPECT_EQ(p1.n_groups(), 2u);
  EXPECT_EQ(p1.group_sizes()[0], 2u);
  EXPECT_EQ(p1.group_sizes()[1], 2u);
  const auto same = p1.refine(Col{9, 9, 9, 9});
  EXPECT_EQ(std::vector<Code>(same.group_ids().begin(), same.group_ids().end()),
            std::vector<Code>(p1.group_ids().begin(), p1.group_ids().end()));
  const auto halves = RowPartition::from_column(Col{0, 0, 1, 1});
  const auto four = refine(halves, Col{0, 1, 0, 1});
  EXPECT_EQ(four.n_groups(), 4u);
  EXPECT_DOUBLE_EQ(four.entropy(), 2.0);
  EXPECT_THROW(halves.refine(Col{0, 1}), std::invalid_argument);
}

TEST(RowPartition, RefineChainMatchesTupleOracle) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 64;
    const std::size_t k = 1 + gen() % 6;
    std::vector<Col> cols;
    RowPartition p = RowPartition::trivial(n);
    for (std::size_t j = 0; j < k; ++j) {
      cols.push_back(random_column(gen, n, 1 + static_cast<int>(gen() % 5)));
      p = p.refine(cols.back());
      ASSERT_NEAR(p.entropy(), oracle::tuple_entropy(cols), 1e-12);
    }
    std::vector<CodeColumn> spans(cols.begin(), cols.end());
    ASSERT_NEAR(joint_entropy(spans), oracle::tuple_entropy(cols), 1e-12);
    // Merging two partitions is the same as refining column by column.
    const auto left = RowPartition::from_column(cols[0]);
    RowPartition right = RowPartition::trivial(n);
    for (std::size_t j = 1; j < k; ++j) right = right.refine(cols[j]);
    ASSERT_NEAR(left.refine(right).entropy(), p.entropy(), 1e-12);
  }
}

TEST(RowPartition, WideCodesUseHashedKeys) {
  Col wide{0, 1000000, 0, 1000000, 7};
  const auto p = RowPartition::from_column(Col{0, 0, 1, 1, 0}).refine(wide);
  EXPECT_EQ(p.n_groups(), 5u);
}

TEST(Properties, InequalityChainIdentitiesAndSymmetry) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + gen() % 64;
    const Col x = random_column(gen, n, 1 + static_cast<int>(gen() % 4));
    const Col y = random_column(gen, n, 1 + static_cast<int>(gen() % 4));
    const Col z = random_column(gen, n, 1 + static_cast<int>(gen() % 4));
    const double hx = entropy(x), hy = entropy(y), hz = entropy(z), hxy = joint_entropy(x, y);
    const double hxgy = conditional_entropy(x, y);
    ASSERT_GE(hxgy, -1e-9);
    ASSERT_LE(hxgy, hx + 1e-9);
    ASSERT_LE(hx, hxy + 1e-9);
    ASSERT_LE(hxy, hx + hy + 1e-9);

    const double i = mutual_information(x, y);
    ASSERT_EQ(i, mutual_information(y, x));
    ASSERT_GE(i, 0.0);
    ASSERT_LE(i, std::min(hx, hy) + 1e-9);
    ASSERT_NEAR(i, oracle::mi(x, y), 1e-9);

    const double ci = conditional_mutual_information(x, y, z);
    ASSERT_NEAR(ci, conditional_mutual_information(y, x, z), 1e-12);
    ASSERT_GE(ci, 0.0);
    ASSERT_LE(ci, std::min(hx, hy) + 1e-9);
    ASSERT_LE(ci, std::min(conditional_entropy(x, z), conditional_entropy(y, z)) + 1e-9);
    ASSERT_NEAR(ci, std::max(0.0, oracle::cmi(x, y, z)), 1e-9);

    const double ig = interaction_gain(x, y, z);
    ASSERT_NEAR(ci, i - ig, 1e-12);
    ASSERT_LE(std::abs(ig), std::min({hx, hy, hz}) + 1e-9);

    const std::vector<CodeColumn> one{CodeColumn(x)};
    ASSERT_EQ(joint_entropy(one), hx);
    ASSERT_NEAR(conditional_entropy(x, x), 0.0, 1e-12);
  }
}

TEST(PairInformation, MatchesSeparateEstimators) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 80;
    const int cx = 1 + static_cast<int>(gen() % 5), cy = 1 + static_cast<int>(gen() % 5),
              cz = 2 + static_cast<int>(gen() % 3);
    const Col x = random_column(gen, n, cx), y = random_column(gen, n, cy), z = random_column(gen, n, cz);
    const auto pi = pair_information(x, cx, y, cy, z, cz);
    ASSERT_NEAR(pi.mi, mutual_information(x, y), 1e-12);
    ASSERT_NEAR(pi.cmi, conditional_mutual_information(x, y, z), 1e-12);
  }
}

TEST(PairCache, AgreesWithDirectComputationInEitherOrder) {
  std::mt19937_64 gen(8);
  oracle::Fixture f = oracle::random_fixture(gen, 6, 50);
  PairCache cache(f.coded, f.data.target, static_cast<Code>(f.data.n_classes()));
  for (std::size_t i = 0; i < 6; ++i) cache.reserve_row(i);
  const CodeColumn y(f.data.target);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      const double expect_mi = mutual_information(f.coded.column(i), f.coded.column(j));
      const double expect_cmi = conditional_mutual_information(f.coded.column(i), f.coded.column(j), y);
      EXPECT_NEAR(cache.mi(i, j), expect_mi, 1e-12);
      EXPECT_NEAR(cache.cmi(j, i), expect_cmi, 1e-12);
      EXPECT_EQ(cache.mi(i, j), cache.mi(j, i));
    }
  }
  const auto fills = cache.fills();
  cache.mi(0, 1);
  EXPECT_EQ(cache.fills(), fills);
}

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "spfp/errors.hpp"
#include "spfp/infometrics.hpp"
#include "spfp/spfp.hpp"

using namespace spfp;

namespace {

Dataset from_columns(const std::vector<std::vector<double>>& cols, std::vector<Code> y,
                     std::size_t n_classes) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, static_cast<Eigen::Index>(j)) = cols[j][static_cast<std::size_t>(i)];
    names.push_back("f" + std::to_string(j));
  }
  std::vector<std::string> classes;
  for (std::size_t c = 0; c < n_classes; ++c) classes.push_back("c" + std::to_string(c));
  return make_dataset(std::move(x), names, std::move(y), classes);
}

std::vector<std::size_t> iota_ids(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

TEST(MinFeatures, ResolvesFractionsAndCounts) {
  EXPECT_EQ((MinFeatures{true, 0.1}.resolve(170)), 17u);
  EXPECT_EQ((MinFeatures{true, 0.1}.resolve(4)), 1u);
  EXPECT_EQ((MinFeatures{false, 3}.resolve(10)), 3u);
}

TEST(SpfpConfig, ValidationNamesTheFlag) {
  SpfpConfig c;
  c.remove_fraction = 1.5;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("--remove-frac"), std::string::npos);
  }
  SpfpConfig v;
  v.n_views = 0;
  EXPECT_THROW(v.validate(), ConfigError);
  SpfpConfig b;
  b.bins = 1;
  EXPECT_THROW(b.validate(), ConfigError);
}

TEST(ScoreCandidate, EmptySelectionIsRelevancePlusInformation) {
  std::mt19937_64 gen(4);
  auto f = oracle::random_fixture(gen, 5, 40);
  SpfpContext ctx(f.data, f.coded);
  const std::vector<double> y(f.data.target.begin(), f.data.target.end());
  for (std::size_t c = 0; c < 5; ++c) {
    const auto raw = f.data.column(c);
    const double expected = oracle::pearson_abs({raw.begin(), raw.end()}, y) +
                            oracle::mi(oracle::column(f.coded, c), {f.data.target.begin(), f.data.target.end()});
    EXPECT_NEAR(score_candidate(c, {}, ctx), expected, 1e-12);
  }
}

TEST(ScoreCandidate, DuplicateOfSelectedWithConstantTarget) {
  const std::vector<double> a{0, 1, 2, 0, 1, 2, 0, 1};
  const Dataset d = from_columns({a, a}, std::vector<Code>(8, 0), 1);
  const CodedMatrix coded = discretize(d, 10, Discretizer::passthrough_if_integral);
  SpfpContext ctx(d, coded);
  const std::vector<std::size_t> sel{0};
  // Redundancy I(f_s;f_c) = H(f_c); with Y constant the conditional term
  // I(f_s;f_c|Y) equals it, so the two cancel.
  const double h = entropy(coded.column(1));
  ctx.cache().reserve_row(0);
  EXPECT_NEAR(ctx.cache().mi(0, 1), h, 1e-12);
  EXPECT_NEAR(ctx.cache().cmi(0, 1), h, 1e-12);
  EXPECT_NEAR(score_candidate(1, sel, ctx), 0.0 + 0.0 - h + h, 1e-12);
}

TEST(ScoreCandidate, IndependentZeroVarianceCandidateScoresZero) {
  const Dataset d = from_columns({{0, 1, 0, 1}, {5, 5, 5, 5}}, {0, 1, 0, 1}, 2);
  const CodedMatrix coded = discretize(d, 10, Discretizer::passthrough_if_integral);
  SpfpContext ctx(d, coded);
  EXPECT_EQ(score_candidate(1, {}, ctx), 0.0);
  const std::vector<std::size_t> sel{0};
  EXPECT_NEAR(score_candidate(1, sel, ctx), 0.0, 1e-12);
  EXPECT_THROW(score_candidate(7, {}, ctx), std::out_of_range);
}

TEST(CriteriaMet, SpecExamples) {
  const auto full = criteria_met(3, 2.0, 2.5, 2.0, 2.5, 2, 1e-9);
  EXPECT_TRUE(full.c1 && full.c2 && full.c3);
  const auto empty = criteria_met(0, 0.0, 1.0, 2.0, 2.5, 1, 1e-9);
  EXPECT_FALSE(empty.c1 || empty.c2 || empty.c3);

  const std::vector<double> a{0, 1, 2, 3, 0, 1};
  const Dataset d = from_columns({a, a}, {0, 1, 0, 1, 1, 0}, 2);
  const CodedMatrix coded = discretize(d, 10, Discretizer::passthrough_if_integral);
  SpfpContext ctx(d, coded);
  const std::vector<std::size_t> s{0};
  const double h_s = partition_of(coded, s).entropy();
  const double h_sy = partition_of(coded, s).refine(CodeColumn(d.target)).entropy();
  EXPECT_TRUE(criteria_met(1, h_s, h_sy, ctx.h_f(), ctx.h_fy(), 1, 1e-9).all());
}

TEST(BuildView, TargetCopyPlusConstantStopsAfterOneStep) {
  const Dataset d = from_columns({{4, 4, 4, 4, 4, 4}, {0, 1, 1, 0, 1, 0}}, {0, 1, 1, 0, 1, 0}, 2);
  const CodedMatrix coded = discretize(d, 10, Discretizer::passthrough_if_integral);
  SpfpContext ctx(d, coded);
  const auto pool = iota_ids(2);
  const View v = build_view(pool, 1, 1e-9, ctx, 1);
  EXPECT_EQ(v.feature_ids, (std::vector<std::size_t>{1}));
  EXPECT_EQ(v.termination, Termination::criteria_met);
  EXPECT_EQ(v.steps.size(), 1u);
}

TEST(BuildView, RestrictedPoolExhausts) {
  std::mt19937_64 gen(12);
  auto f = oracle::random_fixture(gen, 6, 60);
  SpfpContext ctx(f.data, f.coded);
  // Two features alone rarely carry H(F); pick a pair that does not.
  for (std::size_t a = 0; a < 6; ++a) {
    const std::vector<std::size_t> pool{a};
    if (partition_of(f.coded, pool).entropy() >= ctx.h_f() * (1 - 1e-9)) continue;
    const View v = build_view(pool, 1, 1e-9, ctx, 1);
    EXPECT_EQ(v.termination, Termination::pool_exhausted);
    EXPECT_EQ(v.feature_ids, pool);
    return;
  }
  GTEST_SKIP() << "fixture had a single feature carrying H(F)";
}

TEST(BuildView, MatchesBruteForceOracleAndIsMonotone) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t p = 1 + gen() % 8;
    const std::size_t n = 4 + gen() % 61;
    auto f = oracle::random_fixture(gen, p, n, 4, 2 + static_cast<int>(gen() % 2));
    SpfpContext ctx(f.data, f.coded);
    const std::size_t n_f = 1 + gen() % p;
    const auto pool = iota_ids(p);
    const View v = build_view(pool, n_f, 1e-9, ctx, 1 + trial % 3);
    const auto expected = oracle::greedy(f.data, f.coded, pool, n_f, 1e-9);
    ASSERT_EQ(v.feature_ids, expected.order) << "trial " << trial;
    ASSERT_EQ(v.termination == Termination::criteria_met, expected.criteria_met);
    for (std::size_t s = 1; s < v.steps.size(); ++s) {
      ASSERT_GE(v.steps[s].h_s, v.steps[s - 1].h_s - 1e-12);
      ASSERT_GE(v.steps[s].h_sy, v.steps[s - 1].h_sy - 1e-12);
    }
  }
}

TEST(Partition, FullRemovalGivesDisjointViewsUntilExhaustion) {
  std::mt19937_64 gen(31);
  auto f = oracle::random_fixture(gen, 8, 40);
  SpfpConfig c;
  c.n_views = 20;
  c.remove_fraction = 1.0;
  c.min_features = {false, 1};
  try {
    partition(f.data, f.coded, c);
    FAIL() << "expected the feature space to run out";
  } catch (const PoolExhaustedError& e) {
    const ViewSet& vs = e.partial();
    ASSERT_GE(vs.views.size(), 1u);
    std::set<std::size_t> seen;
    for (const auto& v : vs.views) {
      for (const auto id : v.feature_ids) EXPECT_TRUE(seen.insert(id).second);
    }
    EXPECT_EQ(seen.size(), 8u);
  }
}

TEST(Partition, NoRemovalGivesIdenticalViews) {
  std::mt19937_64 gen(32);
  auto f = oracle::random_fixture(gen, 7, 50);
  SpfpConfig c;
  c.remove_fraction = 0.0;
  const ViewSet vs = partition(f.data, f.coded, c);
  ASSERT_EQ(vs.views.size(), 5u);
  for (const auto& v : vs.views) EXPECT_EQ(v.feature_ids, vs.views[0].feature_ids);
  for (const auto& r : vs.removed_log) EXPECT_TRUE(r.empty());
}

TEST(Partition, PoolAccountingDeterminismAndSoundness) {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = oracle::random_fixture(gen, 12, 48);
    SpfpConfig c;
    c.seed = gen();
    c.remove_fraction = 0.3;
    c.min_features = {false, 2};
    ViewSet vs;
    try {
      vs = partition(f.data, f.coded, c);
    } catch (const PoolExhaustedError& e) {
      vs = e.partial();
    }
    ViewSet again;
    try {
      again = partition(f.data, f.coded, c);
    } catch (const PoolExhaustedError& e) {
      again = e.partial();
    }
    ASSERT_EQ(vs.removed_log, again.removed_log);
    std::set<std::size_t> space;
    for (std::size_t j = 0; j < 12; ++j) space.insert(j);
    const auto all = iota_ids(12);
    const double h_f = oracle::tuple_entropy(oracle::columns(f.coded, all));
    for (std::size_t g = 0; g < vs.views.size(); ++g) {
      const auto& v = vs.views[g];
      ASSERT_EQ(v.feature_ids, again.views[g].feature_ids);
      for (const auto id : v.feature_ids) ASSERT_TRUE(space.count(id));
      std::size_t in_view = v.feature_ids.size();
      const auto want = static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(in_view)));
      ASSERT_EQ(vs.removed_log[g].size(), std::min(want, in_view));
      for (const auto r : vs.removed_log[g]) ASSERT_EQ(space.erase(r), 1u);
      if (v.termination == Termination::criteria_met) {
        ASSERT_GE(oracle::tuple_entropy(oracle::columns(f.coded, v.feature_ids)), h_f * (1 - 1e-9));
        ASSERT_GE(v.feature_ids.size(), 2u);
      }
    }
  }
}

TEST(Partition, MinFeaturesAboveFeatureCountIsRejected) {
  std::mt19937_64 gen(34);
  auto f = oracle::random_fixture(gen, 3, 20);
  SpfpConfig c;
  c.min_features = {false, 4};
  EXPECT_THROW(partition(f.data, f.coded, c), ConfigError);
}

TEST(Partition, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 gen(35);
  auto f = oracle::random_fixture(gen, 40, 200, 6, 3);
  SpfpConfig c;
  c.threads = 1;
  const ViewSet one = partition(f.data, f.coded, c);
  c.threads = 4;
  const ViewSet four = partition(f.data, f.coded, c);
  for (std::size_t g = 0; g < one.views.size(); ++g) {
    EXPECT_EQ(one.views[g].feature_ids, four.views[g].feature_ids);
    EXPECT_EQ(one.views[g].scores, four.views[g].scores);
  }
}

TEST(ViewStats, SetAlgebraExamples) {
  auto make = [](std::vector<std::vector<std::size_t>> views) {
    ViewSet vs;
    vs.n_features = 10;
    for (auto& ids : views) {
      View v;
      v.feature_ids = std::move(ids);
      vs.views.push_back(std::move(v));
    }
    return view_stats(vs, 10);
  };
  const auto same = make({{1, 2, 3}, {3, 2, 1}});
  EXPECT_EQ(same.union_size, 3u);
  EXPECT_EQ(same.intersection_size, 3u);
  EXPECT_EQ(same.overlap[0][1], 3u);
  const auto disjoint = make({{0, 1, 2}, {3, 4, 5, 6}});
  EXPECT_EQ(disjoint.union_size, 7u);
  EXPECT_EQ(disjoint.intersection_size, 0u);
  EXPECT_DOUBLE_EQ(disjoint.union_ratio, 0.7);
  const auto chain = make({{1, 2}, {2, 3}, {3, 4}});
  EXPECT_EQ(chain.union_size, 4u);
  EXPECT_EQ(chain.intersection_size, 0u);
  EXPECT_EQ(chain.overlap[0][1], 1u);
  EXPECT_EQ(chain.overlap[0][2], 0u);
  EXPECT_EQ(chain.overlap[1][2], 1u);
  EXPECT_DOUBLE_EQ(chain.ratios[0], 0.2);
}

TEST(Independence, SelfPairEqualsConditionalEntropy) {
  std::mt19937_64 gen(41);
  auto f = oracle::random_fixture(gen, 6, 60);
  ViewSet vs;
  vs.n_features = 6;
  View a, b;
  a.feature_ids = {0, 1, 2};
  b.feature_ids = {3, 4, 5};
  vs.views = {a, a, b};
  const auto rep = conditional_independence_report(vs, f.coded, f.data.target);
  const oracle::Column y(f.data.target.begin(), f.data.target.end());
  auto with_y = [&](std::vector<oracle::Column> c) {
    c.push_back(y);
    return c;
  };
  const auto ca = oracle::columns(f.coded, a.feature_ids);
  const auto cb = oracle::columns(f.coded, b.feature_ids);
  const double h_a_given_y = oracle::tuple_entropy(with_y(ca)) - oracle::entropy(y);
  EXPECT_NEAR(rep.cmi[0][1], h_a_given_y, 1e-9);
  std::vector<oracle::Column> ab = ca;
  ab.insert(ab.end(), cb.begin(), cb.end());
  const double brute = oracle::tuple_entropy(with_y(ca)) + oracle::tuple_entropy(with_y(cb)) -
                       oracle::tuple_entropy(with_y(ab)) - oracle::entropy(y);
  EXPECT_NEAR(rep.cmi[0][2], brute, 1e-9);
  EXPECT_EQ(rep.cmi[0][2], rep.cmi[2][0]);
  EXPECT_NEAR(rep.h_f, oracle::tuple_entropy(ab), 1e-12);
}

TEST(Independence, TargetDeterminesFeatures) {
  const std::vector<Code> y{0, 1, 2, 0, 1, 2};
  const Dataset d = from_columns({{0, 1, 2, 0, 1, 2}, {1, 1, 0, 1, 1, 0}}, y, 3);
  const CodedMatrix coded = discretize(d, 10, Discretizer::passthrough_if_integral);
  ViewSet vs;
  vs.n_features = 2;
  View a, b;
  a.feature_ids = {0};
  b.feature_ids = {1};
  vs.views = {a, b};
  const auto rep = conditional_independence_report(vs, coded, d.target);
  EXPECT_NEAR(rep.cmi[0][1], 0.0, 1e-12);
  EXPECT_TRUE(rep.entropy_condition);
  EXPECT_FALSE(rep.assumption_violated);
  vs.views.pop_back();
  EXPECT_THROW(conditional_independence_report(vs, coded, d.target), DataError);
}

#include "spfp/spfp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "spfp/parallel.hpp"
#include "spfp/rng.hpp"

namespace spfp {

std::size_t MinFeatures::resolve(std::size_t n_features) const {
  if (!is_fraction) return static_cast<std::size_t>(value);
  const auto n = std::llround(value * static_cast<double>(n_features));
  return static_cast<std::size_t>(std::max<long long>(1, n));
}

void SpfpConfig::validate() const {
  if (n_views < 1) throw ConfigError("n_views (--views) must be at least 1");
  if (min_features.is_fraction) {
    if (!(min_features.value > 0.0 && min_features.value <= 1.0)) {
      throw ConfigError("min_features fraction (--min-frac) must lie in (0, 1]");
    }
  } else if (min_features.value < 1.0 || min_features.value != std::floor(min_features.value)) {
    throw ConfigError("min_features count (--min-count) must be a positive integer");
  }
  if (!(remove_fraction >= 0.0 && remove_fraction <= 1.0)) {
    throw ConfigError("remove_fraction (--remove-frac) must lie in [0, 1]");
  }
  if (!(entropy_tolerance > 0.0)) throw ConfigError("entropy_tolerance (--tolerance) must be > 0");
  if (bins < 2) throw ConfigError("bins (--bins) must be at least 2");
}

// ---------------------------------------------------------------------------

SpfpContext::SpfpContext(const Dataset& data, const CodedMatrix& coded,
                         RelevanceCorrelation relevance)
    : coded_(&coded),
      target_(data.target),
      cache_(coded, data.target, static_cast<Code>(data.n_classes())) {
  if (coded.n_rows() != data.n_rows() || coded.n_cols() != data.n_features()) {
    throw std::invalid_argument("coded matrix does not match dataset shape");
  }
  const std::size_t p = coded.n_cols();
  const std::size_t n = data.n_rows();
  correlation_.resize(p);
  target_mi_.resize(p);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(data.target[i]);
  std::vector<std::vector<double>> indicators;
  if (relevance == RelevanceCorrelation::max_ovr) {
    indicators.assign(data.n_classes(), std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) indicators[static_cast<std::size_t>(data.target[i])][i] = 1.0;
  }

  target_partition_ = RowPartition::from_column(target_);
  const double h_y = target_partition_.entropy();
  parallel_for(p, [&](std::size_t f) {
    if (relevance == RelevanceCorrelation::max_ovr) {
      double best = 0.0;
      for (const auto& ind : indicators) best = std::max(best, pearson_abs(data.column(f), ind));
      correlation_[f] = best;
    } else {
      correlation_[f] = pearson_abs(data.column(f), y);
    }
    const CodeColumn col = coded.column(f);
    const double h_x = RowPartition::from_column(col).entropy();
    const double h_xy = target_partition_.refine(col).entropy();
    target_mi_[f] = std::max(0.0, h_x + h_y - h_xy);
  });

  RowPartition all = RowPartition::trivial(n);
  for (std::size_t f = 0; f < p; ++f) all = all.refine(coded.column(f));
  h_f_ = all.entropy();
  h_fy_ = all.refine(target_).entropy();
}

double score_candidate(std::size_t candidate, std::span<const std::size_t> selected,
                       SpfpContext& ctx) {
  if (candidate >= ctx.n_features()) throw std::out_of_range("candidate feature out of range");
  double score = ctx.correlation(candidate) + ctx.target_information(candidate);
  if (selected.empty()) return score;
  double redundancy = 0.0;
  double complementarity = 0.0;
  for (const std::size_t s : selected) {
    if (s == candidate) throw std::invalid_argument("candidate is already selected");
    ctx.cache().reserve_row(s);
    redundancy += ctx.cache().mi(s, candidate);
    complementarity += ctx.cache().cmi(s, candidate);
  }
  const double size = static_cast<double>(selected.size());
  return score - redundancy / size + complementarity / size;
}

CriteriaStatus criteria_met(std::size_t selected_count, double h_s, double h_sy, double h_f,
                            double h_fy, std::size_t n_f, double tolerance) {
  CriteriaStatus st;
  st.c1 = selected_count >= n_f;
  st.c2 = h_s >= h_f * (1.0 - tolerance);
  st.c3 = h_sy >= h_fy * (1.0 - tolerance);
  return st;
}

namespace {

// Scan in ascending feature order; a later candidate must beat the incumbent
// by more than a relative 1e-12 to take over.
bool beats(double challenger, double incumbent) {
  return challenger > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

}  // namespace

View build_view(std::span<const std::size_t> pool_in, std::size_t n_f, double tolerance,
                SpfpContext& ctx, std::size_t threads) {
  if (pool_in.empty()) throw std::invalid_argument("build_view needs a non-empty pool");
  if (threads == 0) threads = default_thread_count();
  std::vector<std::size_t> pool(pool_in.begin(), pool_in.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  const std::size_t p = ctx.n_features();
  std::vector<double> redundancy(p, 0.0);
  std::vector<double> complementarity(p, 0.0);
  std::vector<double> scores(p, 0.0);

  View view;
  RowPartition part_s = RowPartition::trivial(ctx.coded().n_rows());
  RowPartition part_sy = ctx.target_partition();
  view.h_s = part_s.entropy();
  view.h_sy = part_sy.entropy();

  for (;;) {
    const CriteriaStatus st = criteria_met(view.feature_ids.size(), view.h_s, view.h_sy,
                                           ctx.h_f(), ctx.h_fy(), n_f, tolerance);
    if (st.all()) {
      view.termination = Termination::criteria_met;
      break;
    }
    if (pool.empty()) {
      view.termination = Termination::pool_exhausted;
      break;
    }

    const std::size_t s_size = view.feature_ids.size();
    parallel_for(
        pool.size(),
        [&](std::size_t k) {
          const std::size_t c = pool[k];
          double j = ctx.correlation(c) + ctx.target_information(c);
          if (s_size > 0) {
            const double size = static_cast<double>(s_size);
            j = j - redundancy[c] / size + complementarity[c] / size;
          }
          scores[c] = j;
        },
        threads);

    std::size_t best = pool.front();
    for (const std::size_t c : pool) {
      if (beats(scores[c], scores[best])) best = c;
    }

    StepRecord rec;
    rec.candidates = pool.size();
    rec.winner = best;
    rec.score = scores[best];

    view.feature_ids.push_back(best);
    view.scores.push_back(scores[best]);
    const CodeColumn col = ctx.coded().column(best);
    part_s = part_s.refine(col);
    part_sy = part_sy.refine(col);
    view.h_s = part_s.entropy();
    view.h_sy = part_sy.entropy();
    pool.erase(std::lower_bound(pool.begin(), pool.end(), best));

    rec.h_s = view.h_s;
    rec.h_sy = view.h_sy;
    rec.status = criteria_met(view.feature_ids.size(), view.h_s, view.h_sy, ctx.h_f(),
                              ctx.h_fy(), n_f, tolerance);
    view.steps.push_back(rec);

    // Fold the new member into the running penalty sums of the remaining pool.
    PairCache& cache = ctx.cache();
    cache.reserve_row(best);
    parallel_for(
        pool.size(),
        [&](std::size_t k) {
          const std::size_t c = pool[k];
          redundancy[c] += cache.mi(best, c);
          complementarity[c] += cache.cmi(best, c);
        },
        threads);
  }
  return view;
}

void summarize(ViewSet& vs) {
  vs.ratios.clear();
  vs.union_size = 0;
  vs.intersection_size = 0;
  if (vs.views.empty()) return;
  std::vector<std::size_t> hits(vs.n_features, 0);
  for (const View& v : vs.views) {
    for (const std::size_t f : v.feature_ids) ++hits[f];
    vs.ratios.push_back(vs.n_features == 0 ? 0.0
                                           : static_cast<double>(v.feature_ids.size()) /
                                                 static_cast<double>(vs.n_features));
  }
  for (const std::size_t h : hits) {
    if (h > 0) ++vs.union_size;
    if (h == vs.views.size()) ++vs.intersection_size;
  }
}

ViewSet partition(const Dataset& data, const CodedMatrix& coded, const SpfpConfig& config) {
  config.validate();
  const std::size_t p = data.n_features();
  const std::size_t n_f = config.min_features.resolve(p);
  if (n_f > p) {
    throw ConfigError("resolved min_features (" + std::to_string(n_f) +
                      ") exceeds the number of features (" + std::to_string(p) + ")");
  }

  SpfpContext ctx(data, coded, config.relevance);
  ViewSet vs;
  vs.n_features = p;
  vs.resolved_min_features = n_f;
  vs.h_f = ctx.h_f();
  vs.h_fy = ctx.h_fy();

  std::vector<char> in_space(p, 1);
  std::size_t space_size = p;
  const Rng master(config.seed);

  for (std::size_t g = 0; g < config.n_views; ++g) {
    if (space_size == 0) {
      summarize(vs);
      throw PoolExhaustedError("feature space is empty after " + std::to_string(g) + " of " +
                                   std::to_string(config.n_views) + " views",
                               std::move(vs));
    }
    std::vector<std::size_t> pool;
    pool.reserve(space_size);
    for (std::size_t f = 0; f < p; ++f) {
      if (in_space[f]) pool.push_back(f);
    }

    const auto t0 = std::chrono::steady_clock::now();
    View view = build_view(pool, n_f, config.entropy_tolerance, ctx, config.threads);
    const auto t1 = std::chrono::steady_clock::now();
    vs.elapsed.push_back(std::chrono::duration<double>(t1 - t0).count());

    if (view.termination == Termination::pool_exhausted) {
      vs.warnings.push_back("view " + std::to_string(g + 1) +
                            ": feature pool exhausted before the stopping criteria were met");
    }

    std::vector<std::size_t> population;
    for (const std::size_t f : view.feature_ids) {
      if (in_space[f]) population.push_back(f);
    }
    const auto wanted = static_cast<std::size_t>(
        std::max<long long>(0, std::llround(config.remove_fraction *
                                            static_cast<double>(view.feature_ids.size()))));
    Rng rng = master.substream(stream_id::kViewRemovalBase + g);
    std::vector<std::size_t> removed = sample_without_replacement<std::size_t>(
        population, std::min(wanted, population.size()), rng);
    std::sort(removed.begin(), removed.end());
    for (const std::size_t f : removed) in_space[f] = 0;
    space_size -= removed.size();
    vs.removed_log.push_back(std::move(removed));
    vs.views.push_back(std::move(view));
  }
  summarize(vs);
  return vs;
}

ViewSet partition(const Dataset& data, const SpfpConfig& config) {
  config.validate();
  const CodedMatrix coded = discretize(data, config.bins, config.discretizer);
  return partition(data, coded, config);
}

std::string to_string(Termination t) {
  return t == Termination::criteria_met ? "criteria_met" : "pool_exhausted";
}

Termination termination_from_string(std::string_view s) {
  if (s == "criteria_met") return Termination::criteria_met;
  if (s == "pool_exhausted") return Termination::pool_exhausted;
  throw DataError("unknown termination '" + std::string(s) + "'");
}

std::string to_string(RelevanceCorrelation r) {
  return r == RelevanceCorrelation::max_ovr ? "max_ovr" : "class_code";
}

RelevanceCorrelation relevance_from_string(std::string_view s) {
  if (s == "class_code") return RelevanceCorrelation::class_code;
  if (s == "max_ovr") return RelevanceCorrelation::max_ovr;
  throw ConfigError("unknown relevance_correlation '" + std::string(s) + "'");
}

}  // namespace spfp

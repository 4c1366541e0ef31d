#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spfp/dataset.hpp"
#include "spfp/errors.hpp"
#include "spfp/infometrics.hpp"

namespace spfp {

/// Minimum view size N_F, either an absolute count or a fraction of |F|.
struct MinFeatures {
  bool is_fraction = true;
  double value = 0.1;

  /// max(1, round(value * n_features)) for fractions, the count otherwise.
  [[nodiscard]] std::size_t resolve(std::size_t n_features) const;
};

/// How |R(f, Y)| treats a multi-class target: correlation with the integer
/// class code, or the maximum over one-vs-rest class indicators.
enum class RelevanceCorrelation { class_code, max_ovr };

struct SpfpConfig {
  std::size_t n_views = 5;
  MinFeatures min_features{};
  double remove_fraction = 0.6;
  double entropy_tolerance = 1e-9;
  std::uint64_t seed = 0;
  int bins = 10;
  Discretizer discretizer = Discretizer::equal_frequency;
  RelevanceCorrelation relevance = RelevanceCorrelation::class_code;
  std::size_t threads = 0;  // 0: hardware concurrency

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Termination { criteria_met, pool_exhausted };

struct CriteriaStatus {
  bool c1 = false;  // |S| >= N_F
  bool c2 = false;  // H(S) reaches H(F)
  bool c3 = false;  // H(S,Y) reaches H(F,Y)
  [[nodiscard]] bool all() const { return c1 && c2 && c3; }
};

struct StepRecord {
  std::size_t candidates = 0;
  std::size_t winner = 0;
  double score = 0.0;
  double h_s = 0.0;
  double h_sy = 0.0;
  CriteriaStatus status;
};

struct View {
  std::vector<std::size_t> feature_ids;  // selection order
  std::vector<double> scores;
  double h_s = 0.0;
  double h_sy = 0.0;
  Termination termination = Termination::pool_exhausted;
  std::vector<StepRecord> steps;
};

struct ViewSet {
  std::vector<View> views;
  std::size_t n_features = 0;
  std::size_t resolved_min_features = 0;
  double h_f = 0.0;
  double h_fy = 0.0;
  std::size_t union_size = 0;
  std::size_t intersection_size = 0;
  std::vector<double> ratios;                       // |theta_g| / |F|
  std::vector<double> elapsed;                      // seconds per view
  std::vector<std::vector<std::size_t>> removed_log;  // per view, ascending
  std::vector<std::string> warnings;
};

/// Read-only state shared by every view of one run: coded columns, target,
/// per-feature relevance terms, H(F), H(F,Y) and the pairwise cache.
class SpfpContext {
 public:
  SpfpContext(const Dataset& data, const CodedMatrix& coded,
              RelevanceCorrelation relevance = RelevanceCorrelation::class_code);

  [[nodiscard]] const CodedMatrix& coded() const { return *coded_; }
  [[nodiscard]] CodeColumn target() const { return target_; }
  [[nodiscard]] std::size_t n_features() const { return coded_->n_cols(); }
  [[nodiscard]] double correlation(std::size_t f) const { return correlation_[f]; }
  [[nodiscard]] double target_information(std::size_t f) const { return target_mi_[f]; }
  [[nodiscard]] double h_f() const { return h_f_; }
  [[nodiscard]] double h_fy() const { return h_fy_; }
  [[nodiscard]] const RowPartition& target_partition() const { return target_partition_; }
  PairCache& cache() { return cache_; }

 private:
  const CodedMatrix* coded_;
  CodeColumn target_;
  std::vector<double> correlation_;
  std::vector<double> target_mi_;
  RowPartition target_partition_;
  double h_f_ = 0.0;
  double h_fy_ = 0.0;
  PairCache cache_;
};

/// J(f_c) = |R(f_c,Y)| + I(f_c;Y) - mean_{s in S} I(f_s;f_c) + mean_{s in S} I(f_s;f_c|Y).
/// Both means are 0 for an empty selection.
double score_candidate(std::size_t candidate, std::span<const std::size_t> selected,
                       SpfpContext& ctx);

CriteriaStatus criteria_met(std::size_t selected_count, double h_s, double h_sy, double h_f,
                            double h_fy, std::size_t n_f, double tolerance);

/// Greedy forward selection from `pool` until all three criteria hold or the
/// pool runs out. Ties in the objective go to the lowest feature index.
View build_view(std::span<const std::size_t> pool, std::size_t n_f, double tolerance,
                SpfpContext& ctx, std::size_t threads = 0);

/// Thrown when the feature space empties before all views are built.
class PoolExhaustedError : public DataError {
 public:
  PoolExhaustedError(const std::string& what, ViewSet partial)
      : DataError(what), partial_(std::move(partial)) {}
  [[nodiscard]] const ViewSet& partial() const { return partial_; }

 private:
  ViewSet partial_;
};

/// Builds config.n_views views. After view g, round(r * |theta_g|) of its
/// features, drawn without replacement from the view's own features with the
/// per-view removal substream, leave the master feature space.
ViewSet partition(const Dataset& data, const CodedMatrix& coded, const SpfpConfig& config);
ViewSet partition(const Dataset& data, const SpfpConfig& config);

/// Fills union/intersection sizes and ratios from the views.
void summarize(ViewSet& vs);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct ViewStats {
  std::vector<std::size_t> sizes;
  std::vector<double> ratios;
  std::size_t union_size = 0;
  std::size_t intersection_size = 0;
  double union_ratio = 0.0;
  std::vector<double> elapsed;
  std::vector<std::vector<std::size_t>> overlap;  // pairwise common-feature counts
};

ViewStats view_stats(const ViewSet& vs, std::size_t n_features);

struct IndependenceReport {
  std::vector<std::vector<double>> cmi;  // I(theta_a; theta_b | Y), bits
  double h_f = 0.0;
  double h_y = 0.0;
  double h_fy = 0.0;
  double mi_fy = 0.0;
  bool entropy_condition = false;  // H(F) <= H(Y)
  bool assumption_violated = false;  // some off-diagonal CMI above tolerance
  double tolerance = 1e-9;
};

IndependenceReport conditional_independence_report(const ViewSet& vs, const CodedMatrix& coded,
                                                   CodeColumn target, double tolerance = 1e-9);

std::string to_string(Termination t);
Termination termination_from_string(std::string_view s);
std::string to_string(RelevanceCorrelation r);
RelevanceCorrelation relevance_from_string(std::string_view s);

}  // namespace spfp

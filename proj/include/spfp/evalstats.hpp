#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spfp {

/// One metric observed over runs (blocks, rows) for several models
/// (treatments, columns).
struct RunMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> treatment_names;
  bool higher_is_better = true;

  [[nodiscard]] std::size_t n_blocks() const { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] std::size_t n_treatments() const {
    return static_cast<std::size_t>(values.cols());
  }
  /// Throws DataError unless there are >= 2 blocks, >= 2 treatments, one name
  /// per treatment and no non-finite cells.
  void validate() const;
};

/// CSV with a header of model names and one row per run.
RunMatrix read_run_matrix(const std::filesystem::path& path, bool higher_is_better);

/// Within-block ranks, ascending, ties sharing their mean rank.
Eigen::MatrixXd within_block_ranks(const Eigen::MatrixXd& values);

struct FriedmanResult {
  double statistic = 0.0;
  double p = 1.0;
  double df = 0.0;
  Eigen::VectorXd rank_sums;
};

/// Tie-corrected Friedman statistic
///   (k-1) * sum_j (R_j - b(k+1)/2)^2 / (A1 - b k (k+1)^2 / 4),
/// A1 the sum of squared ranks; p from chi-squared with k-1 df. A matrix whose
/// blocks are all constant gives statistic 0 and p 1.
FriedmanResult friedman(const RunMatrix& m);

/// Conover post-hoc for the Friedman design: pairwise two-sided p from
///   t = |R_i - R_j| / sqrt(2 (b A1 - sum R^2) / ((b-1)(k-1))),  df = (b-1)(k-1).
/// Symmetric with unit diagonal.
Eigen::MatrixXd conover_posthoc(const RunMatrix& m);

enum class Adjustment { bonferroni, benjamini_hochberg };

std::vector<double> adjust(std::span<const double> pvals, Adjustment method);

/// Adjusts the strict upper triangle of a symmetric p matrix as one family and
/// mirrors the result.
Eigen::MatrixXd adjust_pairwise(const Eigen::MatrixXd& pvals, Adjustment method);

enum class Magnitude { negligible, small, medium, large };

Magnitude classify_magnitude(double delta);

struct CliffsDelta {
  double delta = 0.0;
  Magnitude magnitude = Magnitude::negligible;
};

/// (#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|).
CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile interval of Cliff's delta over bootstrap replicates resampling a
/// and b independently. Replicate r draws from substream kBootstrapBase + r.
Interval bootstrap_ci(std::span<const double> a, std::span<const double> b,
                      std::size_t replicates = 10000, double confidence = 0.95,
                      std::uint64_t seed = 0);

enum class Outcome { win, tie, loss };

struct ComparisonVerdict {
  std::string model;
  Outcome outcome = Outcome::tie;
  double delta = 0.0;
  Magnitude magnitude = Magnitude::negligible;
  Interval ci;
  double p_friedman_adj = 1.0;
  double p_conover_adj = 1.0;
};

struct MetricInput {
  std::string name;
  RunMatrix matrix;
  bool bonferroni_family = true;  // running time is compared unadjusted
};

struct VerdictOptions {
  double alpha = 0.05;
  std::size_t replicates = 10000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
};

struct MetricVerdicts {
  std::string metric;
  bool higher_is_better = true;
  FriedmanResult friedman;
  double p_friedman_adj = 1.0;
  Eigen::MatrixXd conover_adj;
  std::vector<ComparisonVerdict> verdicts;  // every model except the benchmark
};

/// Win iff adjusted Friedman p < alpha, adjusted Conover p (model vs
/// benchmark) < alpha and delta > 0; loss on the same p's with delta < 0; tie
/// otherwise. Lower-is-better metrics are negated before delta so that
/// delta > 0 always means "better than the benchmark".
std::vector<MetricVerdicts> win_tie_loss(std::span<const MetricInput> metrics,
                                         const std::string& benchmark,
                                         const VerdictOptions& options = {});

std::string to_string(Magnitude m);
std::string to_string(Outcome o);
std::string to_string(Adjustment a);

}  // namespace spfp

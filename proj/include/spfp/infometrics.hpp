#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "spfp/dataset.hpp"

namespace spfp {

// All quantities are in bits (log base 2) and use the maximum-likelihood
// plug-in estimator over empirical frequencies.

using CodeColumn = std::span<const Code>;

/// Entropy of a discrete distribution given by occurrence counts. The sum is
/// taken over the sorted counts, so the result does not depend on the order
/// in which groups were discovered.
double entropy_from_counts(std::span<const std::size_t> counts);

double entropy(CodeColumn column);
double joint_entropy(std::span<const CodeColumn> columns);
double joint_entropy(CodeColumn x, CodeColumn y);
double conditional_entropy(CodeColumn x, CodeColumn given);
double mutual_information(CodeColumn x, CodeColumn y);
double conditional_mutual_information(CodeColumn x, CodeColumn y, CodeColumn given);
/// I(X;Y) - I(X;Y|target), exactly as defined; negative for synergy (XOR gives -1).
double interaction_gain(CodeColumn x, CodeColumn y, CodeColumn target);

/// |sample Pearson r|, 0 when either side has zero variance.
template <typename DerivedX, typename DerivedY>
double pearson_abs(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y);

double pearson_abs(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// RowPartition
// ---------------------------------------------------------------------------

/// Rows grouped by their joint value over the columns refined so far. Group
/// ids are dense and numbered in order of first appearance.
class RowPartition {
 public:
  RowPartition() = default;
  /// One group holding all rows.
  static RowPartition trivial(std::size_t n_rows);
  static RowPartition from_column(CodeColumn column);

  [[nodiscard]] RowPartition refine(CodeColumn column) const;
  [[nodiscard]] RowPartition refine(const RowPartition& other) const;

  [[nodiscard]] double entropy() const { return entropy_from_counts(group_sizes_); }
  [[nodiscard]] std::size_t n_rows() const { return group_id_.size(); }
  [[nodiscard]] std::size_t n_groups() const { return group_sizes_.size(); }
  [[nodiscard]] std::span<const Code> group_ids() const { return group_id_; }
  [[nodiscard]] std::span<const std::size_t> group_sizes() const { return group_sizes_; }

 private:
  std::vector<Code> group_id_;
  std::vector<std::size_t> group_sizes_;
};

inline RowPartition refine(const RowPartition& p, CodeColumn column) { return p.refine(column); }

/// Partition over the listed columns of a coded matrix.
RowPartition partition_of(const CodedMatrix& coded, std::span<const std::size_t> columns);

// ---------------------------------------------------------------------------
// PairCache
// ---------------------------------------------------------------------------

/// Lazily filled symmetric tables of I(f_i;f_j) and I(f_i;f_j|Y). Rows are
/// allocated with `reserve_row` (not thread-safe); once a row exists, `mi` and
/// `cmi` may be called concurrently. Concurrent fills of one cell recompute the
/// same value, so last write wins.
class PairCache {
 public:
  PairCache(const CodedMatrix& coded, CodeColumn target, Code n_classes);

  void reserve_row(std::size_t feature);
  [[nodiscard]] bool has_row(std::size_t feature) const;

  double mi(std::size_t i, std::size_t j);
  double cmi(std::size_t i, std::size_t j);

  [[nodiscard]] std::size_t n_features() const { return coded_->n_cols(); }
  [[nodiscard]] std::size_t fills() const { return fills_.load(std::memory_order_relaxed); }

 private:
  struct Cell {
    std::atomic<double> mi{std::nan("")};
    std::atomic<double> cmi{std::nan("")};
  };
  Cell& cell(std::size_t i, std::size_t j);
  void fill(std::size_t i, std::size_t j, Cell& c);

  const CodedMatrix* coded_;
  CodeColumn target_;
  Code n_classes_;
  std::vector<std::unique_ptr<Cell[]>> rows_;
  std::atomic<std::size_t> fills_{0};
};

/// I(X;Y) and I(X;Y|Z) from one pass over dense codes with known cardinalities.
struct PairInformation {
  double mi = 0.0;
  double cmi = 0.0;
};
PairInformation pair_information(CodeColumn x, Code card_x, CodeColumn y, Code card_y,
                                 CodeColumn z, Code card_z);

// ---------------------------------------------------------------------------

template <typename DerivedX, typename DerivedY>
double pearson_abs(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  const auto xd = x.derived().template cast<double>().eval();
  const auto yd = y.derived().template cast<double>().eval();
  return pearson_abs(std::span<const double>(xd.data(), static_cast<std::size_t>(xd.size())),
                     std::span<const double>(yd.data(), static_cast<std::size_t>(yd.size())));
}

}  // namespace spfp

#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "spfp/dataset.hpp"
#include "spfp/ensemble.hpp"

namespace spfp {

struct MetricReport {
  double f1_micro = 0.0;
  std::optional<double> auc;  // null when no class has both positives and negatives
  double log_loss = 0.0;      // bits per row
  std::optional<double> mec;  // null iff no correct predictions
  std::optional<double> mew;  // null iff no wrong predictions
  double elapsed = 0.0;       // seconds
};

/// Shannon entropy (bits) of one probability row; 0 log 0 = 0.
template <typename Derived>
double row_entropy(const Eigen::MatrixBase<Derived>& row) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double p = row(j);
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
Eigen::Index argmax_row(const Eigen::MatrixBase<Derived>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return best;
}

/// Rank-statistic ROC AUC with midranks for ties. Null when one class is empty.
std::optional<double> binary_auc(std::span<const double> scores, std::span<const char> positive);

/// One-vs-rest macro AUC; the binary case uses the class-1 column.
std::optional<double> multiclass_auc(const ProbMatrix& proba, std::span<const Code> truth);

MetricReport metrics(const ProbMatrix& proba, std::span<const Code> truth);

}  // namespace spfp

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spfp/dataset.hpp"

namespace spfp {

using ProbMatrix = Eigen::MatrixXd;  // rows x classes, each row a distribution

enum class ModelKind { builtin_logistic, imported };

struct LogisticOptions {
  double l2 = 1e-4;
  int max_iters = 1000;
  double tol = 1e-6;
  std::uint64_t seed = 0;  // recorded only; training starts from zero weights
};

/// Multinomial logistic regression on standardized view columns.
struct ProbModel {
  ModelKind kind = ModelKind::builtin_logistic;
  std::vector<std::size_t> feature_ids;
  std::size_t n_classes = 0;
  Eigen::MatrixXd weights;  // (features + 1) x classes, row 0 is the bias
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  int iterations = 0;
  double final_loss = 0.0;  // training objective, nats
  bool converged = false;

  /// Class probabilities for every row of a full feature matrix (the model
  /// picks its own columns).
  [[nodiscard]] ProbMatrix predict_proba(const FeatureMatrix& features) const;
};

/// Row-wise softmax of a logit matrix, shifted by the row maximum.
template <typename Derived>
ProbMatrix softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  ProbMatrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd gradient;
};

/// Mean cross-entropy (nats) plus (l2/2)*||W||^2 over non-bias rows, and its
/// gradient. `design` carries a leading column of ones.
LossGradient logistic_loss_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& design,
                                    std::span<const Code> labels, double l2);

/// Full-batch gradient descent with Armijo backtracking from zero weights.
/// Stops when the gradient max-norm drops below tol or after max_iters.
ProbModel train_builtin(const Dataset& train, std::span<const std::size_t> feature_ids,
                        const LogisticOptions& options = {});

struct EnsembleOutput {
  ProbMatrix proba;
  std::vector<double> weights;        // one per member; 0 for excluded members
  std::vector<std::size_t> excluded;  // members dropped for a zero AUC
};

/// Weighted average with weights AUC_g / sum(AUC). Members with AUC <= 0 are
/// excluded.
EnsembleOutput ensemble_predict(std::span<const ProbMatrix> member_proba,
                                std::span<const double> member_aucs);

/// Reads `row_id,class_0..class_{C-1}` and returns rows ordered as
/// `expected_rows`. Rows must sum to 1 within 1e-6 and are renormalized.
ProbMatrix read_proba_csv(const std::filesystem::path& path, std::size_t n_classes,
                          std::span<const std::size_t> expected_rows);

void write_proba_csv(const std::filesystem::path& path, const ProbMatrix& proba,
                     std::span<const std::size_t> row_ids);

}  // namespace spfp

#include "spfp/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <unordered_map>

#include "spfp/csv.hpp"
#include "spfp/errors.hpp"

namespace spfp {

namespace {

Eigen::MatrixXd design_matrix(const FeatureMatrix& x, const Eigen::RowVectorXd& mean,
                              const Eigen::RowVectorXd& scale) {
  Eigen::MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = (x.rowwise() - mean).array().rowwise() / scale.array();
  return d;
}

}  // namespace

ProbMatrix ProbModel::predict_proba(const FeatureMatrix& features) const {
  const FeatureMatrix x = gather_columns(features, feature_ids);
  return softmax_rows(design_matrix(x, mean, scale) * weights);
}

LossGradient logistic_loss_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& design,
                                    std::span<const Code> labels, double l2) {
  const auto n = design.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("label count does not match design rows");
  }
  ProbMatrix p = softmax_rows(design * weights);
  double nll = 0.0;
  Eigen::MatrixXd residual = p;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    nll -= std::log(std::max(p(i, y), 1e-300));
    residual(i, y) -= 1.0;
  }
  LossGradient out;
  const auto body = weights.bottomRows(weights.rows() - 1);
  out.loss = nll / static_cast<double>(n) + 0.5 * l2 * body.squaredNorm();
  out.gradient = design.transpose() * residual / static_cast<double>(n);
  out.gradient.bottomRows(weights.rows() - 1) += l2 * body;
  return out;
}

ProbModel train_builtin(const Dataset& train, std::span<const std::size_t> feature_ids,
                        const LogisticOptions& options) {
  std::vector<char> seen(train.n_classes(), 0);
  for (const Code c : train.target) seen[static_cast<std::size_t>(c)] = 1;
  if (std::count(seen.begin(), seen.end(), 1) < 2) {
    throw DataError("training data contains a single class");
  }
  ProbModel model;
  model.kind = ModelKind::builtin_logistic;
  model.feature_ids.assign(feature_ids.begin(), feature_ids.end());
  model.n_classes = train.n_classes();

  const FeatureMatrix x = gather_columns(train.features, feature_ids);
  const double n = static_cast<double>(x.rows());
  model.mean = x.colwise().mean();
  model.scale = ((x.rowwise() - model.mean).array().square().colwise().sum() / n).sqrt();
  for (Eigen::Index j = 0; j < model.scale.size(); ++j) {
    if (!(model.scale(j) > 1e-12)) model.scale(j) = 1.0;
  }
  const Eigen::MatrixXd design = design_matrix(x, model.mean, model.scale);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(design.cols(), static_cast<Eigen::Index>(model.n_classes));
  LossGradient cur = logistic_loss_gradient(w, design, train.target, options.l2);
  double step = 1.0;
  int it = 0;
  for (; it < options.max_iters; ++it) {
    if (cur.gradient.cwiseAbs().maxCoeff() < options.tol) {
      model.converged = true;
      break;
    }
    const double g2 = cur.gradient.squaredNorm();
    bool accepted = false;
    while (step > 1e-12) {
      Eigen::MatrixXd trial = w - step * cur.gradient;
      LossGradient next = logistic_loss_gradient(trial, design, train.target, options.l2);
      if (next.loss <= cur.loss - 1e-4 * step * g2) {
        w = std::move(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
    step = std::min(step * 2.0, 1e3);
  }
  if (!model.converged && cur.gradient.cwiseAbs().maxCoeff() < options.tol) model.converged = true;
  model.weights = std::move(w);
  model.iterations = it;
  model.final_loss = cur.loss;
  return model;
}

EnsembleOutput ensemble_predict(std::span<const ProbMatrix> member_proba,
                                std::span<const double> member_aucs) {
  if (member_proba.empty()) throw std::invalid_argument("ensemble needs at least one member");
  if (member_proba.size() != member_aucs.size()) {
    throw std::invalid_argument("one AUC per ensemble member is required");
  }
  const auto rows = member_proba.front().rows();
  const auto cols = member_proba.front().cols();
  for (const ProbMatrix& p : member_proba) {
    if (p.rows() != rows || p.cols() != cols) {
      throw std::invalid_argument("ensemble members disagree on rows or class set");
    }
  }
  EnsembleOutput out;
  out.weights.assign(member_proba.size(), 0.0);
  double total = 0.0;
  for (std::size_t g = 0; g < member_aucs.size(); ++g) {
    if (member_aucs[g] > 0.0 && std::isfinite(member_aucs[g])) {
      total += member_aucs[g];
    } else {
      out.excluded.push_back(g);
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("no ensemble member has a positive AUC");
  out.proba = ProbMatrix::Zero(rows, cols);
  for (std::size_t g = 0; g < member_proba.size(); ++g) {
    if (!(member_aucs[g] > 0.0 && std::isfinite(member_aucs[g]))) continue;
    out.weights[g] = member_aucs[g] / total;
    out.proba += out.weights[g] * member_proba[g];
  }
  return out;
}

ProbMatrix read_proba_csv(const std::filesystem::path& path, std::size_t n_classes,
                          std::span<const std::size_t> expected_rows) {
  const csv::Table table = csv::read(path);
  const std::string name = path.filename().string();
  if (table.header.size() != n_classes + 1 || table.header[0] != "row_id") {
    throw DataError(name + ": expected header row_id,class_0..class_" +
                    std::to_string(n_classes - 1) + " (" + std::to_string(n_classes) +
                    " classes), got " + std::to_string(table.header.size() - 1) + " class columns");
  }
  for (std::size_t k = 0; k < n_classes; ++k) {
    if (table.header[k + 1] != "class_" + std::to_string(k)) {
      throw DataError(name + ": column " + std::to_string(k + 1) + " should be class_" +
                      std::to_string(k));
    }
  }
  std::unordered_map<std::size_t, Eigen::Index> position;
  for (std::size_t i = 0; i < expected_rows.size(); ++i) {
    position.emplace(expected_rows[i], static_cast<Eigen::Index>(i));
  }
  ProbMatrix out = ProbMatrix::Constant(static_cast<Eigen::Index>(expected_rows.size()),
                                        static_cast<Eigen::Index>(n_classes),
                                        std::nan(""));
  std::vector<char> filled(expected_rows.size(), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where = name + " row " + std::to_string(r + 1);
    double id_value = 0.0;
    if (!csv::parse_double(f[0], id_value) || id_value < 0 || id_value != std::floor(id_value)) {
      throw DataError(where + ": invalid row_id '" + f[0] + "'");
    }
    const auto it = position.find(static_cast<std::size_t>(id_value));
    if (it == position.end()) throw DataError(where + ": row_id " + f[0] + " is not an evaluated row");
    if (filled[static_cast<std::size_t>(it->second)]) throw DataError(where + ": duplicate row_id " + f[0]);
    double sum = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      double v = 0.0;
      if (!csv::parse_double(f[k + 1], v) || !(v >= 0.0 && v <= 1.0)) {
        throw DataError(where + ": probability '" + f[k + 1] + "' outside [0, 1]");
      }
      out(it->second, static_cast<Eigen::Index>(k)) = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw DataError(where + ": probabilities sum to " + std::to_string(sum) + ", not 1");
    }
    out.row(it->second) /= sum;
    filled[static_cast<std::size_t>(it->second)] = 1;
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) throw DataError(name + ": no prediction for row_id " + std::to_string(expected_rows[i]));
  }
  return out;
}

void write_proba_csv(const std::filesystem::path& path, const ProbMatrix& proba,
                     std::span<const std::size_t> row_ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "row_id";
  for (Eigen::Index k = 0; k < proba.cols(); ++k) out << ",class_" << k;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    out << row_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < proba.cols(); ++k) out << ',' << proba(i, k);
    out << '\n';
  }
}

}  // namespace spfp

#include "spfp/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace spfp {

std::optional<double> binary_auc(std::span<const double> scores, std::span<const char> positive) {
  if (scores.size() != positive.size()) throw std::invalid_argument("AUC length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::optional<double> multiclass_auc(const ProbMatrix& proba, std::span<const Code> truth) {
  const auto n = static_cast<std::size_t>(proba.rows());
  if (truth.size() != n) throw std::invalid_argument("AUC: truth length mismatch");
  std::vector<double> scores(n);
  std::vector<char> positive(n);
  auto one_class = [&](Eigen::Index k) {
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = proba(static_cast<Eigen::Index>(i), k);
      positive[i] = truth[i] == static_cast<Code>(k);
    }
    return binary_auc(scores, positive);
  };
  if (proba.cols() == 2) return one_class(1);
  double sum = 0.0;
  int used = 0;
  for (Eigen::Index k = 0; k < proba.cols(); ++k) {
    if (const auto a = one_class(k)) {
      sum += *a;
      ++used;
    }
  }
  if (used == 0) return std::nullopt;
  return sum / used;
}

MetricReport metrics(const ProbMatrix& proba, std::span<const Code> truth) {
  const auto n = static_cast<std::size_t>(proba.rows());
  if (truth.size() != n) throw std::invalid_argument("metrics: row count mismatch");
  if (n == 0) throw std::invalid_argument("metrics: no rows");
  for (const Code c : truth) {
    if (c < 0 || c >= proba.cols()) throw std::invalid_argument("metrics: class code out of range");
  }
  MetricReport rep;
  std::size_t correct = 0;
  double loss = 0.0;
  double h_correct = 0.0;
  double h_wrong = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = proba.row(static_cast<Eigen::Index>(i));
    const Eigen::Index y = truth[i];
    const double p_true = std::clamp(row(y), 1e-15, 1.0 - 1e-15);
    loss -= std::log2(p_true);
    const double h = row_entropy(row);
    if (argmax_row(row) == y) {
      ++correct;
      h_correct += h;
    } else {
      h_wrong += h;
    }
  }
  const std::size_t wrong = n - correct;
  rep.f1_micro = static_cast<double>(correct) / static_cast<double>(n);
  rep.log_loss = loss / static_cast<double>(n);
  if (correct > 0) rep.mec = h_correct / static_cast<double>(correct);
  if (wrong > 0) rep.mew = h_wrong / static_cast<double>(wrong);
  rep.auc = multiclass_auc(proba, truth);
  return rep;
}

}  // namespace spfp

#include "spfp/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spfp/csv.hpp"
#include "spfp/errors.hpp"
#include "spfp/parallel.hpp"
#include "spfp/rng.hpp"
#include "spfp/special_functions.hpp"

namespace spfp {

void RunMatrix::validate() const {
  if (values.rows() < 2) throw DataError("run matrix needs at least 2 runs");
  if (values.cols() < 2) throw DataError("run matrix needs at least 2 models");
  if (treatment_names.size() != n_treatments()) {
    throw DataError("run matrix needs one name per model column");
  }
  if (!values.allFinite()) throw DataError("run matrix contains non-finite cells");
}

RunMatrix read_run_matrix(const std::filesystem::path& path, bool higher_is_better) {
  const csv::Table table = csv::read(path);
  RunMatrix m;
  m.treatment_names = table.header;
  m.higher_is_better = higher_is_better;
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                  static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      double v = 0.0;
      if (!csv::parse_double(table.rows[i][j], v)) {
        throw DataError(path.filename().string() + ": bad value '" + table.rows[i][j] +
                        "' at run " + std::to_string(i + 1) + ", column '" + table.header[j] + "'");
      }
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  m.validate();
  return m;
}

Eigen::MatrixXd within_block_ranks(const Eigen::MatrixXd& values) {
  Eigen::MatrixXd ranks(values.rows(), values.cols());
  const auto k = static_cast<std::size_t>(values.cols());
  std::vector<std::size_t> order(k);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values(i, static_cast<Eigen::Index>(a)) < values(i, static_cast<Eigen::Index>(b));
    });
    for (std::size_t s = 0; s < k;) {
      std::size_t e = s + 1;
      while (e < k && values(i, static_cast<Eigen::Index>(order[e])) ==
                          values(i, static_cast<Eigen::Index>(order[s]))) {
        ++e;
      }
      const double mid = 0.5 * static_cast<double>(s + 1 + e);
      for (std::size_t t = s; t < e; ++t) ranks(i, static_cast<Eigen::Index>(order[t])) = mid;
      s = e;
    }
  }
  return ranks;
}

namespace {

struct RankSummary {
  Eigen::VectorXd rank_sums;
  double a1 = 0.0;  // sum of squared ranks
  double b = 0.0;
  double k = 0.0;
};

RankSummary summarize_ranks(const RunMatrix& m) {
  m.validate();
  const Eigen::MatrixXd r = within_block_ranks(m.values);
  RankSummary s;
  s.rank_sums = r.colwise().sum().transpose();
  s.a1 = r.array().square().sum();
  s.b = static_cast<double>(m.n_blocks());
  s.k = static_cast<double>(m.n_treatments());
  return s;
}

}  // namespace

FriedmanResult friedman(const RunMatrix& m) {
  const RankSummary s = summarize_ranks(m);
  FriedmanResult out;
  out.rank_sums = s.rank_sums;
  out.df = s.k - 1.0;
  const double c1 = s.b * s.k * (s.k + 1.0) * (s.k + 1.0) / 4.0;
  const double denom = s.a1 - c1;
  const double centre = s.b * (s.k + 1.0) / 2.0;
  const double spread = (s.rank_sums.array() - centre).square().sum();
  if (denom <= 1e-12 * c1) {
    out.statistic = 0.0;
    out.p = 1.0;
    return out;
  }
  out.statistic = (s.k - 1.0) * spread / denom;
  out.p = special::chi2_sf(out.statistic, out.df);
  return out;
}

Eigen::MatrixXd conover_posthoc(const RunMatrix& m) {
  const RankSummary s = summarize_ranks(m);
  const double df = (s.b - 1.0) * (s.k - 1.0);
  const double residual = s.b * s.a1 - s.rank_sums.squaredNorm();
  const double scale = std::sqrt(std::max(0.0, 2.0 * residual / df));
  const auto k = static_cast<Eigen::Index>(s.k);
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double diff = std::abs(s.rank_sums(i) - s.rank_sums(j));
      double pv = 1.0;
      if (diff > 0.0) {
        pv = scale <= 1e-12 * std::max(1.0, diff) ? 0.0 : special::t_two_sided(diff / scale, df);
      }
      p(i, j) = pv;
      p(j, i) = pv;
    }
  }
  return p;
}

std::vector<double> adjust(std::span<const double> pvals, Adjustment method) {
  for (const double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-values must lie in [0, 1]");
  }
  const std::size_t m = pvals.size();
  std::vector<double> out(m);
  if (m == 0) return out;
  const double md = static_cast<double>(m);
  if (method == Adjustment::bonferroni) {
    for (std::size_t i = 0; i < m; ++i) out[i] = std::min(1.0, md * pvals[i]);
    return out;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const std::size_t idx = order[r];
    running = std::min(running, pvals[idx] * md / static_cast<double>(r + 1));
    out[idx] = std::min(1.0, std::max(pvals[idx], running));
  }
  return out;
}

Eigen::MatrixXd adjust_pairwise(const Eigen::MatrixXd& pvals, Adjustment method) {
  const Eigen::Index k = pvals.rows();
  std::vector<double> flat;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) flat.push_back(pvals(i, j));
  }
  const std::vector<double> adj = adjust(flat, method);
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(k, k);
  std::size_t t = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      out(i, j) = adj[t];
      out(j, i) = adj[t];
      ++t;
    }
  }
  return out;
}

Magnitude classify_magnitude(double delta) {
  const double d = std::abs(delta);
  if (d < 0.147) return Magnitude::negligible;
  if (d < 0.333) return Magnitude::small;
  if (d < 0.474) return Magnitude::medium;
  return Magnitude::large;
}

namespace {

double delta_against_sorted(std::span<const double> a, const std::vector<double>& b_sorted) {
  long long dominance = 0;
  for (const double x : a) {
    const auto less = std::lower_bound(b_sorted.begin(), b_sorted.end(), x) - b_sorted.begin();
    const auto greater = b_sorted.end() - std::upper_bound(b_sorted.begin(), b_sorted.end(), x);
    dominance += less - greater;
  }
  return static_cast<double>(dominance) /
         (static_cast<double>(a.size()) * static_cast<double>(b_sorted.size()));
}

}  // namespace

CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Cliff's delta needs non-empty samples");
  std::vector<double> b_sorted(b.begin(), b.end());
  std::sort(b_sorted.begin(), b_sorted.end());
  CliffsDelta out;
  out.delta = delta_against_sorted(a, b_sorted);
  out.magnitude = classify_magnitude(out.delta);
  return out;
}

Interval bootstrap_ci(std::span<const double> a, std::span<const double> b,
                      std::size_t replicates, double confidence, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("bootstrap needs non-empty samples");
  if (replicates < 100) throw std::invalid_argument("bootstrap needs at least 100 replicates");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  const Rng master(seed);
  std::vector<double> deltas(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    Rng rng = master.substream(stream_id::kBootstrapBase + r);
    std::vector<double> ra(a.size());
    std::vector<double> rb(b.size());
    for (double& v : ra) v = a[rng.uniform_index(a.size())];
    for (double& v : rb) v = b[rng.uniform_index(b.size())];
    std::sort(rb.begin(), rb.end());
    deltas[r] = delta_against_sorted(ra, rb);
  });
  std::sort(deltas.begin(), deltas.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(deltas.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= deltas.size()) return deltas.back();
    return deltas[lo] + frac * (deltas[lo + 1] - deltas[lo]);
  };
  const double tail = 0.5 * (1.0 - confidence);
  return {quantile(tail), quantile(1.0 - tail)};
}

std::vector<MetricVerdicts> win_tie_loss(std::span<const MetricInput> metrics,
                                         const std::string& benchmark,
                                         const VerdictOptions& options) {
  std::vector<MetricVerdicts> out;
  std::vector<double> family_p;
  std::vector<std::size_t> family_idx;
  for (const MetricInput& in : metrics) {
    in.matrix.validate();
    MetricVerdicts mv;
    mv.metric = in.name;
    mv.higher_is_better = in.matrix.higher_is_better;
    mv.friedman = friedman(in.matrix);
    mv.p_friedman_adj = mv.friedman.p;
    mv.conover_adj = adjust_pairwise(conover_posthoc(in.matrix), Adjustment::benjamini_hochberg);
    if (in.bonferroni_family) {
      family_p.push_back(mv.friedman.p);
      family_idx.push_back(out.size());
    }
    out.push_back(std::move(mv));
  }
  const std::vector<double> family_adj = adjust(family_p, Adjustment::bonferroni);
  for (std::size_t t = 0; t < family_idx.size(); ++t) {
    out[family_idx[t]].p_friedman_adj = family_adj[t];
  }

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const RunMatrix& rm = metrics[m].matrix;
    const auto bench_it =
        std::find(rm.treatment_names.begin(), rm.treatment_names.end(), benchmark);
    if (bench_it == rm.treatment_names.end()) {
      throw DataError("metric '" + metrics[m].name + "' has no benchmark column '" + benchmark + "'");
    }
    const auto bench = static_cast<Eigen::Index>(bench_it - rm.treatment_names.begin());
    const double sign = rm.higher_is_better ? 1.0 : -1.0;
    const Eigen::VectorXd bench_values = sign * rm.values.col(bench);
    MetricVerdicts& mv = out[m];
    for (Eigen::Index j = 0; j < rm.values.cols(); ++j) {
      if (j == bench) continue;
      const Eigen::VectorXd model_values = sign * rm.values.col(j);
      const std::span<const double> a(model_values.data(), static_cast<std::size_t>(model_values.size()));
      const std::span<const double> b(bench_values.data(), static_cast<std::size_t>(bench_values.size()));
      ComparisonVerdict v;
      v.model = rm.treatment_names[static_cast<std::size_t>(j)];
      const CliffsDelta cd = cliffs_delta(a, b);
      v.delta = cd.delta;
      v.magnitude = cd.magnitude;
      v.ci = bootstrap_ci(a, b, options.replicates, options.confidence, options.seed);
      v.p_friedman_adj = mv.p_friedman_adj;
      v.p_conover_adj = mv.conover_adj(j, bench);
      const bool significant = v.p_friedman_adj < options.alpha && v.p_conover_adj < options.alpha;
      if (significant && v.delta > 0.0) {
        v.outcome = Outcome::win;
      } else if (significant && v.delta < 0.0) {
        v.outcome = Outcome::loss;
      } else {
        v.outcome = Outcome::tie;
      }
      mv.verdicts.push_back(std::move(v));
    }
  }
  return out;
}

std::string to_string(Magnitude m) {
  switch (m) {
    case Magnitude::negligible: return "negligible";
    case Magnitude::small: return "small";
    case Magnitude::medium: return "medium";
    case Magnitude::large: return "large";
  }
  return "negligible";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::win: return "win";
    case Outcome::tie: return "tie";
    case Outcome::loss: return "loss";
  }
  return "tie";
}

std::string to_string(Adjustment a) {
  return a == Adjustment::bonferroni ? "bonferroni" : "benjamini_hochberg";
}

}  // namespace spfp

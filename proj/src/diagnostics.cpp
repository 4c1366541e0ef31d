#include <algorithm>
#include <stdexcept>

#include "spfp/spfp.hpp"

namespace spfp {

ViewStats view_stats(const ViewSet& vs, std::size_t n_features) {
  if (vs.views.empty()) throw std::invalid_argument("view_stats needs at least one view");
  ViewStats st;
  const std::size_t k = vs.views.size();
  std::vector<std::vector<char>> member(k, std::vector<char>(n_features, 0));
  std::vector<std::size_t> hits(n_features, 0);
  for (std::size_t g = 0; g < k; ++g) {
    const auto& ids = vs.views[g].feature_ids;
    st.sizes.push_back(ids.size());
    st.ratios.push_back(n_features == 0 ? 0.0
                                        : static_cast<double>(ids.size()) /
                                              static_cast<double>(n_features));
    for (const std::size_t f : ids) {
      member[g][f] = 1;
      ++hits[f];
    }
  }
  for (const std::size_t h : hits) {
    if (h > 0) ++st.union_size;
    if (h == k) ++st.intersection_size;
  }
  st.union_ratio = n_features == 0 ? 0.0
                                   : static_cast<double>(st.union_size) /
                                         static_cast<double>(n_features);
  st.overlap.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      std::size_t common = 0;
      for (std::size_t f = 0; f < n_features; ++f) common += (member[a][f] && member[b][f]);
      st.overlap[a][b] = common;
    }
  }
  st.elapsed = vs.elapsed;
  return st;
}

IndependenceReport conditional_independence_report(const ViewSet& vs, const CodedMatrix& coded,
                                                   CodeColumn target, double tolerance) {
  if (vs.views.size() < 2) {
    throw DataError("conditional independence report needs at least two views");
  }
  const std::size_t k = vs.views.size();
  const RowPartition y = RowPartition::from_column(target);

  std::vector<RowPartition> view_part;
  std::vector<RowPartition> view_y;
  std::vector<double> h_view_y;
  for (const View& v : vs.views) {
    view_part.push_back(partition_of(coded, v.feature_ids));
    view_y.push_back(view_part.back().refine(target));
    h_view_y.push_back(view_y.back().entropy());
  }

  IndependenceReport rep;
  rep.tolerance = tolerance;
  rep.h_y = y.entropy();
  std::vector<std::size_t> all(coded.n_cols());
  for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
  const RowPartition pf = partition_of(coded, all);
  rep.h_f = pf.entropy();
  rep.h_fy = pf.refine(target).entropy();
  rep.mi_fy = std::max(0.0, rep.h_f + rep.h_y - rep.h_fy);
  rep.entropy_condition = rep.h_f <= rep.h_y + 1e-12;

  rep.cmi.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double h_aby = view_y[a].refine(view_part[b]).entropy();
      const double cmi = std::max(0.0, h_view_y[a] + h_view_y[b] - h_aby - rep.h_y);
      rep.cmi[a][b] = cmi;
      rep.cmi[b][a] = cmi;
      if (a != b && cmi > tolerance) rep.assumption_violated = true;
    }
  }
  return rep;
}

}  // namespace spfp

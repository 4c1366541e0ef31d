#include "spfp/report_json.hpp"

#include <fstream>

#include "spfp/errors.hpp"

namespace spfp {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json named_features(std::span<const std::size_t> ids,
                              std::span<const std::string> names) {
  nlohmann::json arr = nlohmann::json::array();
  for (const std::size_t f : ids) {
    arr.push_back({{"index", f}, {"name", f < names.size() ? names[f] : std::string()}});
  }
  return arr;
}

std::vector<std::size_t> feature_indices(const nlohmann::json& arr) {
  std::vector<std::size_t> ids;
  for (const auto& f : arr) ids.push_back(f.at("index").get<std::size_t>());
  return ids;
}

}  // namespace

nlohmann::json viewset_to_json(const ViewSet& vs, std::span<const std::string> feature_names,
                               const RunConfig& config) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = to_json(config);
  j["seed"] = config.spfp.seed;
  j["n_features"] = vs.n_features;
  j["min_features_resolved"] = vs.resolved_min_features;
  j["h_f"] = vs.h_f;
  j["h_fy"] = vs.h_fy;
  j["union"] = vs.union_size;
  j["intersection"] = vs.intersection_size;
  j["ratios"] = vs.ratios;
  j["warnings"] = vs.warnings;
  nlohmann::json views = nlohmann::json::array();
  for (std::size_t g = 0; g < vs.views.size(); ++g) {
    const View& v = vs.views[g];
    nlohmann::json steps = nlohmann::json::array();
    for (const StepRecord& s : v.steps) {
      steps.push_back({{"candidates", s.candidates},
                       {"winner", s.winner},
                       {"score", s.score},
                       {"h_s", s.h_s},
                       {"h_sy", s.h_sy},
                       {"c1", s.status.c1},
                       {"c2", s.status.c2},
                       {"c3", s.status.c3}});
    }
    views.push_back({{"index", g + 1},
                     {"features", named_features(v.feature_ids, feature_names)},
                     {"scores", v.scores},
                     {"h_s", v.h_s},
                     {"h_sy", v.h_sy},
                     {"termination", to_string(v.termination)},
                     {"steps", std::move(steps)}});
  }
  j["views"] = std::move(views);
  nlohmann::json removed = nlohmann::json::array();
  for (const auto& r : vs.removed_log) removed.push_back(named_features(r, feature_names));
  j["removed"] = std::move(removed);
  return j;
}

ViewSet viewset_from_json(const nlohmann::json& j) {
  ViewSet vs;
  try {
    vs.n_features = j.at("n_features").get<std::size_t>();
    vs.resolved_min_features = j.value("min_features_resolved", std::size_t{0});
    vs.h_f = j.value("h_f", 0.0);
    vs.h_fy = j.value("h_fy", 0.0);
    for (const auto& jv : j.at("views")) {
      View v;
      v.feature_ids = feature_indices(jv.at("features"));
      v.scores = jv.value("scores", std::vector<double>{});
      v.h_s = jv.value("h_s", 0.0);
      v.h_sy = jv.value("h_sy", 0.0);
      v.termination = termination_from_string(jv.value("termination", std::string("criteria_met")));
      for (const std::size_t f : v.feature_ids) {
        if (f >= vs.n_features) throw DataError("views file lists feature index out of range");
      }
      vs.views.push_back(std::move(v));
    }
    if (j.contains("removed")) {
      for (const auto& r : j.at("removed")) vs.removed_log.push_back(feature_indices(r));
    }
    vs.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed views file: ") + e.what());
  }
  summarize(vs);
  return vs;
}

nlohmann::json view_stats_to_json(const ViewStats& st, const RunConfig& config) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = to_json(config);
  j["sizes"] = st.sizes;
  j["ratios"] = st.ratios;
  j["union"] = st.union_size;
  j["intersection"] = st.intersection_size;
  j["union_ratio"] = st.union_ratio;
  j["overlap"] = st.overlap;
  return j;
}

nlohmann::json independence_to_json(const IndependenceReport& rep, const RunConfig& config) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = to_json(config);
  j["cmi"] = rep.cmi;
  j["h_f"] = rep.h_f;
  j["h_y"] = rep.h_y;
  j["h_fy"] = rep.h_fy;
  j["mi_fy"] = rep.mi_fy;
  j["h_f_le_h_y"] = rep.entropy_condition;
  j["assumption_violated"] = rep.assumption_violated;
  j["tolerance"] = rep.tolerance;
  return j;
}

nlohmann::json metric_report_to_json(const MetricReport& rep) {
  return {{"f1_micro", rep.f1_micro},
          {"auc", optional_number(rep.auc)},
          {"log_loss", rep.log_loss},
          {"mec", optional_number(rep.mec)},
          {"mew", optional_number(rep.mew)}};
}

nlohmann::json verdicts_to_json(std::span<const MetricVerdicts> verdicts,
                                const nlohmann::json& config) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config;
  j["methods"] = {
      {"friedman", "tie-corrected chi-squared form, df = k-1; p Bonferroni-adjusted across "
                   "metrics in the adjustment family"},
      {"conover", "t = |R_i - R_j| / sqrt(2 (b A1 - sum R_j^2) / ((b-1)(k-1))), "
                  "df = (b-1)(k-1), two-sided; Benjamini-Hochberg over all pairs"},
      {"cliffs_delta", "lower-is-better metrics negated; percentile bootstrap interval"}};
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json summary = nlohmann::json::object();
  for (const MetricVerdicts& mv : verdicts) {
    nlohmann::json m;
    m["higher_is_better"] = mv.higher_is_better;
    m["friedman"] = {{"statistic", mv.friedman.statistic},
                     {"df", mv.friedman.df},
                     {"p", mv.friedman.p},
                     {"p_adjusted", mv.p_friedman_adj}};
    std::vector<std::vector<double>> conover(static_cast<std::size_t>(mv.conover_adj.rows()));
    for (Eigen::Index r = 0; r < mv.conover_adj.rows(); ++r) {
      for (Eigen::Index c = 0; c < mv.conover_adj.cols(); ++c) {
        conover[static_cast<std::size_t>(r)].push_back(mv.conover_adj(r, c));
      }
    }
    m["conover_adjusted"] = conover;
    nlohmann::json vj = nlohmann::json::object();
    for (const ComparisonVerdict& v : mv.verdicts) {
      vj[v.model] = {{"outcome", to_string(v.outcome)},
                     {"delta", v.delta},
                     {"magnitude", to_string(v.magnitude)},
                     {"ci", {v.ci.lo, v.ci.hi}},
                     {"p_friedman_adj", v.p_friedman_adj},
                     {"p_conover_adj", v.p_conover_adj}};
      summary[v.model][mv.metric] = to_string(v.outcome);
    }
    m["verdicts"] = std::move(vj);
    metrics[mv.metric] = std::move(m);
  }
  j["metrics"] = std::move(metrics);
  j["summary"] = std::move(summary);
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace spfp

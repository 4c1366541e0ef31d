#include "spfp/config.hpp"

#include <fstream>

#include "spfp/errors.hpp"

namespace spfp {

void RunConfig::validate() const {
  spfp.validate();
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction (--test-frac) must lie in [0, 1)");
  }
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction (--holdout-frac) must lie in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha (--alpha) must lie in (0, 1)");
  if (bootstrap < 100) throw ConfigError("bootstrap (--bootstrap) must be at least 100");
  if (model.l2 < 0.0) throw ConfigError("model.l2 (--l2) must be >= 0");
  if (model.max_iters < 1) throw ConfigError("model.max_iters (--max-iters) must be >= 1");
  if (!(model.tol > 0.0)) throw ConfigError("model.tol must be > 0");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["format_version"] = c.format_version;
  j["input"] = c.input;
  j["target"] = c.target;
  j["output_dir"] = c.output_dir;
  j["views"] = c.spfp.n_views;
  if (c.spfp.min_features.is_fraction) {
    j["min_features"] = {{"fraction", c.spfp.min_features.value}};
  } else {
    j["min_features"] = {{"count", static_cast<std::size_t>(c.spfp.min_features.value)}};
  }
  j["remove_fraction"] = c.spfp.remove_fraction;
  j["entropy_tolerance"] = c.spfp.entropy_tolerance;
  j["seed"] = c.spfp.seed;
  j["bins"] = c.spfp.bins;
  j["discretizer"] = to_string(c.spfp.discretizer);
  j["relevance_correlation"] = to_string(c.spfp.relevance);
  j["test_fraction"] = c.test_fraction;
  j["stratified"] = c.stratified;
  j["missing_policy"] = to_string(c.missing_policy);
  j["model"] = {{"kind", "builtin_logistic"},
                {"l2", c.model.l2},
                {"max_iters", c.model.max_iters},
                {"tol", c.model.tol}};
  j["holdout_fraction"] = c.holdout_fraction;
  j["alpha"] = c.alpha;
  j["bootstrap"] = c.bootstrap;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    c.format_version = j.value("format_version", kFormatVersion);
    if (c.format_version != kFormatVersion) {
      throw ConfigError("unsupported format_version " + std::to_string(c.format_version));
    }
    c.input = j.value("input", c.input);
    c.target = j.value("target", c.target);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.spfp.n_views = j.value("views", c.spfp.n_views);
    if (j.contains("min_features")) {
      const auto& mf = j.at("min_features");
      if (mf.contains("fraction")) {
        c.spfp.min_features = {true, mf.at("fraction").get<double>()};
      } else if (mf.contains("count")) {
        c.spfp.min_features = {false, static_cast<double>(mf.at("count").get<std::size_t>())};
      } else {
        throw ConfigError("min_features needs 'fraction' or 'count'");
      }
    }
    c.spfp.remove_fraction = j.value("remove_fraction", c.spfp.remove_fraction);
    c.spfp.entropy_tolerance = j.value("entropy_tolerance", c.spfp.entropy_tolerance);
    c.spfp.seed = j.value("seed", c.spfp.seed);
    c.spfp.bins = j.value("bins", c.spfp.bins);
    c.spfp.discretizer =
        discretizer_from_string(j.value("discretizer", to_string(c.spfp.discretizer)));
    c.spfp.relevance =
        relevance_from_string(j.value("relevance_correlation", to_string(c.spfp.relevance)));
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.stratified = j.value("stratified", c.stratified);
    c.missing_policy = missing_policy_from_string(j.value("missing_policy", to_string(c.missing_policy)));
    if (j.contains("model")) {
      const auto& m = j.at("model");
      c.model.l2 = m.value("l2", c.model.l2);
      c.model.max_iters = m.value("max_iters", c.model.max_iters);
      c.model.tol = m.value("tol", c.model.tol);
    }
    c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
    c.alpha = j.value("alpha", c.alpha);
    c.bootstrap = j.value("bootstrap", c.bootstrap);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.model.seed = c.spfp.seed;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

}  // namespace spfp

#include "spfp/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "spfp/config.hpp"
#include "spfp/dataset.hpp"
#include "spfp/ensemble.hpp"
#include "spfp/errors.hpp"
#include "spfp/evalstats.hpp"
#include "spfp/metrics.hpp"
#include "spfp/report_json.hpp"
#include "spfp/rng.hpp"
#include "spfp/spfp.hpp"

namespace fs = std::filesystem;

namespace spfp::cli {

namespace {

std::string theta_name(std::size_t g) { return "theta_" + std::to_string(g + 1); }
std::string ensemble_name(std::size_t k) { return "E_1:" + std::to_string(k); }

// Values the user may set on the command line; only flags actually given
// override the config file / defaults.
struct ConfigFlags {
  std::string config_path;
  std::string input, target, out, discretizer, missing, relevance;
  std::size_t views = 0;
  double min_frac = 0, remove_frac = 0, tolerance = 0, test_frac = 0;
  std::size_t min_count = 0;
  int bins = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
  double l2 = 0, holdout = 0;
  int max_iters = 0;
  std::map<std::string, CLI::Option*> given;

  void add_data_flags(CLI::App& app) {
    given["config"] = app.add_option("--config", config_path, "JSON run configuration");
    given["input"] = app.add_option("--input", input, "input CSV file");
    given["target"] = app.add_option("--target", target, "target column name or index");
    given["out"] = app.add_option("--out", out, "output directory");
  }
  void add_partition_flags(CLI::App& app) {
    given["views"] = app.add_option("--views", views, "number of views N_theta");
    auto* mf = app.add_option("--min-frac", min_frac, "minimum view size as a fraction of |F|");
    auto* mc = app.add_option("--min-count", min_count, "minimum view size as a count");
    mf->excludes(mc);
    given["min-frac"] = mf;
    given["min-count"] = mc;
    given["remove-frac"] = app.add_option("--remove-frac", remove_frac, "fraction r of each view removed from the feature space");
    given["bins"] = app.add_option("--bins", bins, "discretization bins");
    given["discretizer"] = app.add_option("--discretizer", discretizer, "equal_frequency | equal_width | passthrough_if_integral");
    given["tolerance"] = app.add_option("--tolerance", tolerance, "relative tolerance of the entropy criteria");
    given["seed"] = app.add_option("--seed", seed, "master seed");
    given["test-frac"] = app.add_option("--test-frac", test_frac, "test fraction of the train/test split (0: no split)");
    given["stratified"] = app.add_flag("--stratified,!--no-stratify", stratified, "stratify the split by class");
    given["missing-policy"] = app.add_option("--missing-policy", missing, "reject | drop | median");
    given["relevance"] = app.add_option("--relevance", relevance, "class_code | max_ovr");
  }
  void add_model_flags(CLI::App& app) {
    given["l2"] = app.add_option("--l2", l2, "L2 penalty of the builtin logistic regression");
    given["max-iters"] = app.add_option("--max-iters", max_iters, "gradient descent iterations");
    given["holdout-frac"] = app.add_option("--holdout-frac", holdout, "training fraction held out for AUC weights");
  }

  bool has(const std::string& name) const {
    const auto it = given.find(name);
    return it != given.end() && it->second->count() > 0;
  }

  void apply(RunConfig& c) const {
    if (has("input")) c.input = input;
    if (has("target")) c.target = target;
    if (has("out")) c.output_dir = out;
    if (has("views")) c.spfp.n_views = views;
    if (has("min-frac")) c.spfp.min_features = {true, min_frac};
    if (has("min-count")) c.spfp.min_features = {false, static_cast<double>(min_count)};
    if (has("remove-frac")) c.spfp.remove_fraction = remove_frac;
    if (has("bins")) c.spfp.bins = bins;
    if (has("discretizer")) c.spfp.discretizer = discretizer_from_string(discretizer);
    if (has("tolerance")) c.spfp.entropy_tolerance = tolerance;
    if (has("seed")) c.spfp.seed = seed;
    if (has("test-frac")) c.test_fraction = test_frac;
    if (has("stratified")) c.stratified = stratified;
    if (has("missing-policy")) c.missing_policy = missing_policy_from_string(missing);
    if (has("relevance")) c.spfp.relevance = relevance_from_string(relevance);
    if (has("l2")) c.model.l2 = l2;
    if (has("max-iters")) c.model.max_iters = max_iters;
    if (has("holdout-frac")) c.holdout_fraction = holdout;
    c.model.seed = c.spfp.seed;
  }
};

struct LoadedData {
  Dataset all;
  Dataset train;
  Dataset test;
  bool has_test = false;
};

LoadedData load_and_split(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("--input is required");
  if (c.target.empty()) throw ConfigError("--target is required");
  LoadedData d;
  d.all = load_csv(c.input, c.target, LoadOptions{c.missing_policy});
  if (c.test_fraction > 0.0) {
    auto [train, test] = split(d.all, c.split_spec());
    d.train = std::move(train);
    d.test = std::move(test);
    d.has_test = true;
  } else {
    d.train = d.all;
  }
  return d;
}

void print_view_summary(const ViewSet& vs, const ViewStats& st, std::ostream& out) {
  out << "H(F) = " << std::setprecision(6) << vs.h_f << " bits, H(F,Y) = " << vs.h_fy
      << " bits, N_F = " << vs.resolved_min_features << "\n";
  out << "view  size  ratio   H(S)      H(S,Y)    termination     removed  seconds\n";
  for (std::size_t g = 0; g < vs.views.size(); ++g) {
    const View& v = vs.views[g];
    out << std::left << std::setw(6) << theta_name(g).substr(6) << std::setw(6)
        << v.feature_ids.size() << std::setw(8) << std::fixed << std::setprecision(3)
        << st.ratios[g] << std::setw(10) << std::setprecision(4) << v.h_s << std::setw(10)
        << v.h_sy << std::setw(16) << to_string(v.termination) << std::setw(9)
        << (g < vs.removed_log.size() ? vs.removed_log[g].size() : 0) << std::setprecision(3)
        << (g < st.elapsed.size() ? st.elapsed[g] : 0.0) << "\n";
    out << std::defaultfloat << std::right;
  }
  out << "union " << st.union_size << " / " << vs.n_features << ", intersection "
      << st.intersection_size << "\n";
}

nlohmann::json timings_json(const ViewSet& vs) {
  return {{"format_version", kFormatVersion}, {"view_seconds", vs.elapsed}};
}

// ---------------------------------------------------------------------------

int cmd_partition(RunConfig config, std::size_t threads, const std::string& write_config,
                  std::ostream& out, std::ostream& err) {
  config.validate();
  config.spfp.threads = threads;
  const LoadedData d = load_and_split(config);
  const CodedMatrix coded = discretize(d.train, config.spfp.bins, config.spfp.discretizer);
  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);
  if (!write_config.empty()) write_json(write_config, to_json(config));
  if (d.all.dropped_rows > 0 || d.all.imputed_cells > 0) {
    err << "note: " << d.all.dropped_rows << " row(s) dropped, " << d.all.imputed_cells
        << " cell(s) imputed for missing values\n";
  }

  ViewSet vs;
  int code = kOk;
  try {
    vs = partition(d.train, coded, config.spfp);
  } catch (const PoolExhaustedError& e) {
    vs = e.partial();
    err << "error: " << e.what() << "; writing the views built so far\n";
    code = kDataError;
  }
  nlohmann::json vj = viewset_to_json(vs, d.train.feature_names, config);
  vj["n_rows"] = d.train.n_rows();
  vj["complete"] = code == kOk;
  write_json(dir / "views.json", vj);
  write_json(dir / "timings.json", timings_json(vs));
  for (const auto& w : vs.warnings) err << "warning: " << w << "\n";
  if (vs.views.empty()) return code;
  const ViewStats st = view_stats(vs, vs.n_features);
  write_json(dir / "view_stats.json", view_stats_to_json(st, config));
  print_view_summary(vs, st, out);
  return code;
}

struct ViewsFile {
  RunConfig config;
  ViewSet views;
};

ViewsFile read_views(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("views file not found: " + path.string());
  const nlohmann::json j = read_json(path);
  if (!j.contains("config")) throw DataError("views file has no config block");
  return {run_config_from_json(j.at("config")), viewset_from_json(j)};
}

int cmd_evaluate(const fs::path& views_path, const ConfigFlags& flags, const std::string& import_dir,
                 bool save_proba, std::ostream& out, std::ostream& err) {
  ViewsFile vf = read_views(views_path);
  RunConfig config = vf.config;
  flags.apply(config);
  config.validate();
  if (config.test_fraction <= 0.0) {
    throw ConfigError("evaluate needs a test split; views were built with test_fraction 0");
  }
  const LoadedData d = load_and_split(config);
  if (d.train.n_features() != vf.views.n_features) {
    throw DataError("dataset has " + std::to_string(d.train.n_features()) +
                    " features but the views file was built on " +
                    std::to_string(vf.views.n_features));
  }
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  const std::size_t n_views = vf.views.views.size();
  const std::size_t n_classes = d.train.n_classes();

  // Inner training rows and the holdout that prices ensemble weights.
  const SplitIndices inner = split_indices(
      d.train.target, n_classes, {config.holdout_fraction, config.spfp.seed, config.stratified},
      stream_id::kHoldoutSplit);
  const Dataset fit = select_rows(d.train, inner.train);
  const Dataset holdout = select_rows(d.train, inner.test);

  std::vector<std::string> names;
  for (std::size_t g = 0; g < n_views; ++g) names.push_back(theta_name(g));
  names.push_back("All");

  std::vector<ProbMatrix> test_proba(names.size());
  std::vector<std::optional<ProbMatrix>> holdout_proba(names.size());
  std::vector<double> seconds(names.size(), 0.0);
  nlohmann::json training = nlohmann::json::object();
  std::string weight_source = "holdout";
  std::vector<std::string> warnings;

  std::vector<std::size_t> all_features(d.train.n_features());
  for (std::size_t f = 0; f < all_features.size(); ++f) all_features[f] = f;

  if (import_dir.empty()) {
    for (std::size_t m = 0; m < names.size(); ++m) {
      const auto& ids = m < n_views ? vf.views.views[m].feature_ids : all_features;
      const auto t0 = std::chrono::steady_clock::now();
      const ProbModel model = train_builtin(fit, ids, config.model);
      test_proba[m] = model.predict_proba(d.test.features);
      holdout_proba[m] = model.predict_proba(holdout.features);
      seconds[m] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      training[names[m]] = {{"iterations", model.iterations},
                            {"final_loss_nats", model.final_loss},
                            {"converged", model.converged}};
    }
  } else {
    const fs::path idir(import_dir);
    for (std::size_t m = 0; m < names.size(); ++m) {
      const fs::path file = idir / (names[m] + ".csv");
      if (!fs::exists(file)) throw DataError("missing imported predictions " + file.string());
      test_proba[m] = read_proba_csv(file, n_classes, d.test.row_ids);
      const fs::path hfile = idir / (names[m] + ".holdout.csv");
      if (fs::exists(hfile)) holdout_proba[m] = read_proba_csv(hfile, n_classes, holdout.row_ids);
    }
    for (std::size_t g = 0; g < n_views; ++g) {
      if (!holdout_proba[g]) {
        weight_source = "test";
        warnings.push_back("no holdout predictions imported; ensemble weights use test AUCs");
        break;
      }
    }
  }

  if (save_proba) {
    const fs::path pdir = dir / "proba";
    fs::create_directories(pdir);
    for (std::size_t m = 0; m < names.size(); ++m) {
      write_proba_csv(pdir / (names[m] + ".csv"), test_proba[m], d.test.row_ids);
      if (holdout_proba[m]) {
        write_proba_csv(pdir / (names[m] + ".holdout.csv"), *holdout_proba[m], holdout.row_ids);
      }
    }
  }

  nlohmann::json models = nlohmann::json::object();
  std::vector<std::string> order;
  std::vector<MetricReport> reports;
  for (std::size_t m = 0; m < names.size(); ++m) {
    MetricReport rep = metrics(test_proba[m], d.test.target);
    rep.elapsed = seconds[m];
    models[names[m]] = metric_report_to_json(rep);
    order.push_back(names[m]);
    reports.push_back(rep);
  }

  std::vector<double> member_auc(n_views, 0.0);
  for (std::size_t g = 0; g < n_views; ++g) {
    const auto auc = weight_source == "holdout"
                         ? multiclass_auc(*holdout_proba[g], holdout.target)
                         : reports[g].auc;
    member_auc[g] = auc.value_or(0.0);
    if (!(member_auc[g] > 0.0)) {
      warnings.push_back(names[g] + " has AUC 0 and is excluded from ensembles");
    }
  }
  for (std::size_t k = 2; k <= n_views; ++k) {
    const EnsembleOutput ens = ensemble_predict(std::span(test_proba.data(), k),
                                                std::span(member_auc.data(), k));
    nlohmann::json mj = metric_report_to_json(metrics(ens.proba, d.test.target));
    mj["weights"] = ens.weights;
    models[ensemble_name(k)] = std::move(mj);
    order.insert(order.end() - 1, ensemble_name(k));
    if (save_proba) {
      write_proba_csv(dir / "proba" / (ensemble_name(k) + ".csv"), ens.proba, d.test.row_ids);
    }
  }

  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = to_json(config);
  j["models"] = std::move(models);
  j["model_order"] = order;
  j["weight_source"] = weight_source;
  j["holdout_fraction"] = config.holdout_fraction;
  j["member_auc"] = member_auc;
  j["mode"] = import_dir.empty() ? "builtin_logistic" : "imported";
  j["training"] = std::move(training);
  j["test_rows"] = d.test.n_rows();
  j["warnings"] = warnings;
  write_json(dir / "metrics.json", j);

  nlohmann::json tj = {{"format_version", kFormatVersion}};
  for (std::size_t m = 0; m < names.size(); ++m) tj["model_seconds"][names[m]] = seconds[m];
  write_json(dir / "metrics.timings.json", tj);

  for (const auto& w : warnings) err << "warning: " << w << "\n";
  out << std::left << std::setw(8) << "model" << std::setw(10) << "f1" << std::setw(10) << "auc"
      << std::setw(10) << "logloss" << std::setw(10) << "mec" << "mew\n";
  const auto& mj = j.at("models");
  for (const auto& name : order) {
    const auto& r = mj.at(name);
    auto cell = [](const nlohmann::json& v) {
      std::ostringstream s;
      if (v.is_null()) {
        s << "null";
      } else {
        s << std::fixed << std::setprecision(4) << v.get<double>();
      }
      return s.str();
    };
    out << std::setw(8) << name << std::setw(10) << cell(r.at("f1_micro")) << std::setw(10)
        << cell(r.at("auc")) << std::setw(10) << cell(r.at("log_loss")) << std::setw(10)
        << cell(r.at("mec")) << cell(r.at("mew")) << "\n";
  }
  return kOk;
}

int cmd_diagnose(const fs::path& views_path, const ConfigFlags& flags, double tolerance,
                 std::ostream& out) {
  ViewsFile vf = read_views(views_path);
  RunConfig config = vf.config;
  flags.apply(config);
  config.validate();
  if (vf.views.views.size() < 2) {
    throw DataError("diagnose needs at least two views, the views file has " +
                    std::to_string(vf.views.views.size()));
  }
  const LoadedData d = load_and_split(config);
  if (d.train.n_features() != vf.views.n_features) {
    throw DataError("dataset feature count does not match the views file");
  }
  const CodedMatrix coded = discretize(d.train, config.spfp.bins, config.spfp.discretizer);
  const IndependenceReport rep =
      conditional_independence_report(vf.views, coded, d.train.target, tolerance);
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_json(dir / "independence.json", independence_to_json(rep, config));
  out << "H(F) = " << rep.h_f << ", H(Y) = " << rep.h_y << ", H(F) <= H(Y): "
      << (rep.entropy_condition ? "yes" : "no") << "\n";
  out << "pairwise I(theta_a; theta_b | Y) in bits:\n";
  for (const auto& row : rep.cmi) {
    for (const double v : row) out << std::setw(10) << std::setprecision(4) << v;
    out << "\n";
  }
  out << "conditional independence " << (rep.assumption_violated ? "violated" : "holds")
      << " at tolerance " << tolerance << "\n";
  return kOk;
}

bool lower_is_better_by_name(const std::string& name) {
  static const char* kLower[] = {"log_loss", "logloss", "loss", "log-loss", "mec", "time",
                                 "elapsed"};
  std::string lower;
  for (const char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const char* k : kLower) {
    if (lower == k) return true;
  }
  return false;
}

int cmd_stats(const std::vector<std::string>& matrices, const std::vector<std::string>& lower,
              const std::vector<std::string>& unadjusted, const std::string& benchmark,
              const VerdictOptions& options, const std::string& out_dir, std::ostream& out) {
  if (matrices.empty()) throw ConfigError("--matrix NAME=PATH is required at least once");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  if (options.replicates < 100) throw ConfigError("--bootstrap must be at least 100");
  std::vector<MetricInput> inputs;
  for (const auto& spec : matrices) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw ConfigError("--matrix expects NAME=PATH, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    bool lib = lower_is_better_by_name(name);
    if (std::find(lower.begin(), lower.end(), name) != lower.end()) lib = true;
    MetricInput in;
    in.name = name;
    in.matrix = read_run_matrix(spec.substr(eq + 1), !lib);
    in.bonferroni_family = std::find(unadjusted.begin(), unadjusted.end(), name) == unadjusted.end();
    inputs.push_back(std::move(in));
  }
  const auto verdicts = win_tie_loss(inputs, benchmark, options);
  const nlohmann::json cfg = {{"alpha", options.alpha},
                              {"bootstrap", options.replicates},
                              {"confidence", options.confidence},
                              {"seed", options.seed},
                              {"benchmark", benchmark},
                              {"unadjusted", unadjusted}};
  fs::create_directories(out_dir);
  write_json(fs::path(out_dir) / "verdicts.json", verdicts_to_json(verdicts, cfg));
  for (const auto& mv : verdicts) {
    out << mv.metric << ": Friedman chi2 = " << mv.friedman.statistic
        << ", p_adj = " << mv.p_friedman_adj << "\n";
    for (const auto& v : mv.verdicts) {
      out << "  " << std::left << std::setw(10) << v.model << std::setw(6) << to_string(v.outcome)
          << " delta=" << v.delta << " [" << v.ci.lo << ", " << v.ci.hi << "] "
          << to_string(v.magnitude) << "\n"
          << std::right;
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic-preserving feature partitioning for multi-view ensembles", "spfp"};
  app.require_subcommand(1);

  ConfigFlags pflags;
  std::size_t threads = 0;
  std::string write_config;
  auto* part = app.add_subcommand("partition", "build views and write views.json");
  pflags.add_data_flags(*part);
  pflags.add_partition_flags(*part);
  part->add_option("--threads", threads, "worker threads for candidate scoring (0: all cores)");
  part->add_option("--write-config", write_config, "also write the resolved config to this file");

  ConfigFlags eflags;
  std::string views_file, import_dir;
  bool save_proba = false;
  auto* eval = app.add_subcommand("evaluate", "train per-view models and ensembles, write metrics.json");
  eflags.add_data_flags(*eval);
  eflags.add_model_flags(*eval);
  eval->add_option("--views", views_file, "views.json (default: <out>/views.json)");
  eval->add_option("--import-proba", import_dir, "directory of externally produced probability CSVs");
  eval->add_flag("--save-proba", save_proba, "write test/holdout probabilities under <out>/proba");

  ConfigFlags dflags;
  std::string dviews;
  double cmi_tol = 1e-9;
  auto* diag = app.add_subcommand("diagnose", "conditional-independence diagnostic, write independence.json");
  dflags.add_data_flags(*diag);
  diag->add_option("--views", dviews, "views.json (default: <out>/views.json)");
  diag->add_option("--tolerance", cmi_tol, "CMI above this counts as dependence (bits)");

  std::vector<std::string> matrices, lower;
  std::vector<std::string> unadjusted{"time"};
  std::string benchmark = "All", stats_out = "out";
  VerdictOptions vopts;
  auto* stats = app.add_subcommand("stats", "Friedman/Conover/Cliff's delta verdicts, write verdicts.json");
  stats->add_option("--matrix", matrices, "NAME=PATH run matrix CSV (repeatable)");
  stats->add_option("--lower-better", lower, "metric names where lower is better (repeatable)");
  stats->add_option("--unadjusted", unadjusted, "metrics left out of the Bonferroni family")
      ->capture_default_str();
  stats->add_option("--benchmark", benchmark, "benchmark model column")->capture_default_str();
  stats->add_option("--alpha", vopts.alpha, "significance level")->capture_default_str();
  stats->add_option("--bootstrap", vopts.replicates, "bootstrap replicates")->capture_default_str();
  stats->add_option("--confidence", vopts.confidence, "bootstrap interval confidence")->capture_default_str();
  stats->add_option("--seed", vopts.seed, "bootstrap seed")->capture_default_str();
  stats->add_option("--out", stats_out, "output directory")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (part->parsed()) {
      RunConfig config;
      if (pflags.has("config")) config = load_run_config(pflags.config_path);
      pflags.apply(config);
      return cmd_partition(config, threads, write_config, out, err);
    }
    if (eval->parsed()) {
      const std::string out_dir = eflags.has("out") ? eflags.out : std::string("out");
      const fs::path vp = views_file.empty() ? fs::path(out_dir) / "views.json" : fs::path(views_file);
      return cmd_evaluate(vp, eflags, import_dir, save_proba, out, err);
    }
    if (diag->parsed()) {
      const std::string out_dir = dflags.has("out") ? dflags.out : std::string("out");
      const fs::path vp = dviews.empty() ? fs::path(out_dir) / "views.json" : fs::path(dviews);
      return cmd_diagnose(vp, dflags, cmi_tol, out);
    }
    if (stats->parsed()) {
      return cmd_stats(matrices, lower, unadjusted, benchmark, vopts, stats_out, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace spfp::cli

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spfp/config.hpp"
#include "spfp/evalstats.hpp"
#include "spfp/metrics.hpp"
#include "spfp/spfp.hpp"

namespace spfp {

/// The views.json contract: per view `features` (index + name), `scores`,
/// `h_s`, `h_sy`, `termination`, `steps`; plus `union`, `intersection`,
/// `removed`, `config`, `seed`. Wall-clock timings are deliberately absent.
nlohmann::json viewset_to_json(const ViewSet& vs, std::span<const std::string> feature_names,
                               const RunConfig& config);
ViewSet viewset_from_json(const nlohmann::json& j);

nlohmann::json view_stats_to_json(const ViewStats& st, const RunConfig& config);
nlohmann::json independence_to_json(const IndependenceReport& rep, const RunConfig& config);
nlohmann::json metric_report_to_json(const MetricReport& rep);
nlohmann::json verdicts_to_json(std::span<const MetricVerdicts> verdicts, const nlohmann::json& config);

/// Pretty-printed with sorted keys and a trailing newline; byte-stable.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace spfp

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "spfp/dataset.hpp"
#include "spfp/ensemble.hpp"
#include "spfp/spfp.hpp"

namespace spfp {

inline constexpr int kFormatVersion = 1;

/// Everything a CLI run depends on. Serializes to the JSON config file and
/// back without loss.
struct RunConfig {
  SpfpConfig spfp;
  std::string input;
  std::string target;
  std::string output_dir = "out";
  double test_fraction = 0.33;  // 0 disables the split
  bool stratified = true;
  MissingPolicy missing_policy = MissingPolicy::reject;
  LogisticOptions model;
  double holdout_fraction = 0.2;
  double alpha = 0.05;
  std::size_t bootstrap = 10000;
  int format_version = kFormatVersion;

  [[nodiscard]] SplitSpec split_spec() const { return {test_fraction, spfp.seed, stratified}; }
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace spfp

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spfp {

using Code = std::int32_t;
using FeatureMatrix = Eigen::MatrixXd;  // rows x features, column-major
using CodeMatrix = Eigen::Matrix<Code, Eigen::Dynamic, Eigen::Dynamic>;

/// Raw numeric features plus a label-encoded categorical target.
struct Dataset {
  FeatureMatrix features;
  std::vector<std::string> feature_names;
  std::vector<Code> target;              // 0..n_classes()-1
  std::vector<std::string> class_names;  // first-appearance order
  std::vector<std::size_t> row_ids;      // 0-based data-row position in the source file
  std::size_t dropped_rows = 0;
  std::size_t imputed_cells = 0;

  [[nodiscard]] std::size_t n_rows() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t n_features() const {
    return static_cast<std::size_t>(features.cols());
  }
  [[nodiscard]] std::size_t n_classes() const { return class_names.size(); }
  [[nodiscard]] std::span<const double> column(std::size_t j) const {
    return {features.col(static_cast<Eigen::Index>(j)).data(), n_rows()};
  }
};

enum class MissingPolicy { reject, drop, median };

struct LoadOptions {
  MissingPolicy missing = MissingPolicy::reject;
};

/// Loads a header-first CSV. `target_column` is a header name, or a 0-based
/// column index when no header field has that name.
Dataset load_csv(const std::filesystem::path& path, std::string_view target_column,
                 const LoadOptions& options = {});

/// Builds a dataset from in-memory parts, enforcing the Dataset invariants.
Dataset make_dataset(FeatureMatrix features, std::vector<std::string> feature_names,
                     std::vector<Code> target, std::vector<std::string> class_names);

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

enum class Discretizer { equal_frequency, equal_width, passthrough_if_integral };

/// Small-integer codes per column. For every column j the codes are dense:
/// each value in 0..cardinalities[j]-1 occurs at least once.
struct CodedMatrix {
  CodeMatrix codes;
  std::vector<Code> cardinalities;
  std::vector<std::vector<double>> bin_edges;  // empty for passthrough columns

  [[nodiscard]] std::size_t n_rows() const { return static_cast<std::size_t>(codes.rows()); }
  [[nodiscard]] std::size_t n_cols() const { return static_cast<std::size_t>(codes.cols()); }
  [[nodiscard]] std::span<const Code> column(std::size_t j) const {
    return {codes.col(static_cast<Eigen::Index>(j)).data(), n_rows()};
  }
};

/// Codes one column. A value v lands in bin #{edges e : e < v}; equal values
/// always share a code and the mapping is order-preserving.
struct ColumnCoding {
  std::vector<Code> codes;
  Code cardinality = 0;
  std::vector<double> edges;
};
ColumnCoding discretize_column(std::span<const double> values, int bins, Discretizer strategy);

CodedMatrix discretize(const Dataset& data, int bins, Discretizer strategy);

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct SplitSpec {
  double test_fraction = 0.33;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending row positions
  std::vector<std::size_t> test;
};

/// Deterministic given (data, spec, stream). Stratified splits put at least one
/// row of every class on each side and keep per-class test counts within one
/// row of test_fraction * class size.
SplitIndices split_indices(std::span<const Code> target, std::size_t n_classes,
                           const SplitSpec& spec, std::uint64_t stream);

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

Dataset select_rows(const Dataset& data, std::span<const std::size_t> rows);

/// Copies the listed feature columns into a new matrix.
FeatureMatrix gather_columns(const FeatureMatrix& features, std::span<const std::size_t> ids);

// Text forms used by the config file and CLI.
std::string to_string(Discretizer d);
Discretizer discretizer_from_string(std::string_view s);
std::string to_string(MissingPolicy p);
MissingPolicy missing_policy_from_string(std::string_view s);

}  // namespace spfp

#include "spfp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "spfp/csv.hpp"
#include "spfp/errors.hpp"
#include "spfp/rng.hpp"

namespace spfp {

namespace {

bool is_missing(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "?";
}

std::size_t resolve_target(const std::vector<std::string>& header, std::string_view target) {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == target) return j;
  }
  if (!target.empty() && std::all_of(target.begin(), target.end(),
                                     [](char c) { return c >= '0' && c <= '9'; })) {
    const auto idx = static_cast<std::size_t>(std::stoull(std::string(target)));
    if (idx < header.size()) return idx;
  }
  throw DataError("target column '" + std::string(target) + "' not found");
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Dataset make_dataset(FeatureMatrix features, std::vector<std::string> feature_names,
                     std::vector<Code> target, std::vector<std::string> class_names) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (target.size() != n) throw DataError("target length does not match feature rows");
  if (feature_names.size() != static_cast<std::size_t>(features.cols())) {
    throw DataError("feature name count does not match feature columns");
  }
  std::vector<std::size_t> seen(class_names.size(), 0);
  for (const Code c : target) {
    if (c < 0 || static_cast<std::size_t>(c) >= class_names.size()) {
      throw DataError("target code out of range");
    }
    ++seen[static_cast<std::size_t>(c)];
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (seen[k] == 0) throw DataError("class '" + class_names[k] + "' has no rows");
  }
  if (!features.allFinite()) throw DataError("feature matrix contains non-finite values");
  Dataset d;
  d.features = std::move(features);
  d.feature_names = std::move(feature_names);
  d.target = std::move(target);
  d.class_names = std::move(class_names);
  d.row_ids.resize(n);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});
  return d;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view target_column,
                 const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  const csv::Table table = csv::read(path);
  const std::size_t target_col = resolve_target(table.header, target_column);
  const std::size_t n_cols = table.header.size();
  const std::size_t n_feat = n_cols - 1;

  std::vector<std::string> names;
  names.reserve(n_feat);
  for (std::size_t j = 0; j < n_cols; ++j) {
    if (j != target_col) names.push_back(table.header[j]);
  }

  // Parse into rows of optional values so the missing policy can run afterwards.
  std::vector<std::vector<std::optional<double>>> parsed;
  std::vector<std::string> labels;
  std::vector<std::size_t> row_ids;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& fields = table.rows[i];
    const std::size_t row_no = i + 1;  // 1-based data row
    if (is_missing(fields[target_col])) {
      if (options.missing == MissingPolicy::reject) {
        throw DataError("missing target value at row " + std::to_string(row_no) +
                        ", column '" + table.header[target_col] + "'");
      }
      ++dropped;
      continue;
    }
    std::vector<std::optional<double>> row;
    row.reserve(n_feat);
    bool has_missing = false;
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (j == target_col) continue;
      if (is_missing(fields[j])) {
        if (options.missing == MissingPolicy::reject) {
          throw DataError("missing value at row " + std::to_string(row_no) + ", column '" +
                          table.header[j] + "'");
        }
        has_missing = true;
        row.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      if (!csv::parse_double(fields[j], v) || !std::isfinite(v)) {
        throw DataError("unparseable value '" + fields[j] + "' at row " +
                        std::to_string(row_no) + ", column '" + table.header[j] + "'");
      }
      row.emplace_back(v);
    }
    if (has_missing && options.missing == MissingPolicy::drop) {
      ++dropped;
      continue;
    }
    parsed.push_back(std::move(row));
    labels.push_back(fields[target_col]);
    row_ids.push_back(i);
  }

  const std::size_t n = parsed.size();
  if (n == 0) throw DataError("no usable rows in " + path.string());

  FeatureMatrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_feat));
  std::size_t imputed = 0;
  for (std::size_t j = 0; j < n_feat; ++j) {
    std::vector<double> present;
    for (std::size_t i = 0; i < n; ++i) {
      if (parsed[i][j]) present.push_back(*parsed[i][j]);
    }
    const double fill = present.empty() ? 0.0 : median_of(present);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = parsed[i][j];
      if (!cell) ++imputed;
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cell ? *cell : fill;
    }
  }

  std::vector<std::string> class_names;
  std::unordered_map<std::string, Code> class_index;
  std::vector<Code> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = class_index.try_emplace(labels[i], static_cast<Code>(class_names.size()));
    if (inserted) class_names.push_back(labels[i]);
    target[i] = it->second;
  }
  if (class_names.size() < 2) {
    throw DataError("target column '" + table.header[target_col] + "' has fewer than 2 classes");
  }

  Dataset d = make_dataset(std::move(features), std::move(names), std::move(target),
                           std::move(class_names));
  d.row_ids = std::move(row_ids);
  d.dropped_rows = dropped;
  d.imputed_cells = imputed;
  return d;
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ColumnCoding dense_rank_codes(std::span<const double> values, const std::vector<double>& distinct) {
  ColumnCoding out;
  out.codes.reserve(values.size());
  for (const double v : values) {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), v);
    out.codes.push_back(static_cast<Code>(it - distinct.begin()));
  }
  out.cardinality = static_cast<Code>(distinct.size());
  return out;
}

// Assigns bin = #{edges < v}, then drops empty bins so codes stay dense.
ColumnCoding bin_by_edges(std::span<const double> values, std::vector<double> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<Code> raw(values.size());
  std::vector<char> used(edges.size() + 1, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = std::lower_bound(edges.begin(), edges.end(), values[i]);
    raw[i] = static_cast<Code>(it - edges.begin());
    used[static_cast<std::size_t>(raw[i])] = 1;
  }
  std::vector<Code> remap(used.size(), -1);
  ColumnCoding out;
  Code next = 0;
  for (std::size_t b = 0; b < used.size(); ++b) {
    if (!used[b]) continue;
    if (next > 0) out.edges.push_back(edges[b - 1]);
    remap[b] = next++;
  }
  out.cardinality = next;
  out.codes.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.codes[i] = remap[static_cast<std::size_t>(raw[i])];
  }
  return out;
}

}  // namespace

ColumnCoding discretize_column(std::span<const double> values, int bins, Discretizer strategy) {
  if (bins < 2) throw ConfigError("bins must be at least 2");
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const bool integral =
      std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == std::floor(v); });
  if (integral && (distinct.size() <= static_cast<std::size_t>(bins) ||
                   strategy == Discretizer::passthrough_if_integral)) {
    return dense_rank_codes(values, distinct);
  }

  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(bins - 1));
  if (strategy == Discretizer::equal_width) {
    const double lo = sorted.front();
    const double width = (sorted.back() - lo) / bins;
    for (int k = 1; k < bins; ++k) edges.push_back(lo + width * k);
  } else {
    for (int k = 1; k < bins; ++k) {
      edges.push_back(quantile_sorted(sorted, static_cast<double>(k) / bins));
    }
  }
  return bin_by_edges(values, std::move(edges));
}

CodedMatrix discretize(const Dataset& data, int bins, Discretizer strategy) {
  if (bins < 2) throw ConfigError("bins must be at least 2");
  CodedMatrix out;
  const auto n = static_cast<Eigen::Index>(data.n_rows());
  const auto p = static_cast<Eigen::Index>(data.n_features());
  out.codes.resize(n, p);
  out.cardinalities.resize(data.n_features());
  out.bin_edges.resize(data.n_features());
  for (Eigen::Index j = 0; j < p; ++j) {
    auto coding = discretize_column(data.column(static_cast<std::size_t>(j)), bins, strategy);
    out.codes.col(j) = Eigen::Map<const Eigen::Matrix<Code, Eigen::Dynamic, 1>>(
        coding.codes.data(), n);
    out.cardinalities[static_cast<std::size_t>(j)] = coding.cardinality;
    out.bin_edges[static_cast<std::size_t>(j)] = std::move(coding.edges);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

SplitIndices split_indices(std::span<const Code> target, std::size_t n_classes,
                           const SplitSpec& spec, std::uint64_t stream) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = target.size();
  if (n < 2) throw DataError("at least two rows are needed to split");
  Rng rng = Rng(spec.seed).substream(stream);
  std::vector<char> in_test(n, 0);

  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = 1;
  } else {
    std::vector<std::vector<std::size_t>> members(n_classes);
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(target[i])].push_back(i);
    std::vector<std::size_t> alloc(n_classes, 0);
    std::vector<double> remainder(n_classes, 0.0);
    std::size_t allocated = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      const std::size_t size = members[k].size();
      if (size < 2) {
        throw DataError("class " + std::to_string(k) + " has " + std::to_string(size) +
                        " row(s); stratified split needs at least 2");
      }
      const double exact = spec.test_fraction * static_cast<double>(size);
      alloc[k] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(exact)), 1, size - 1);
      remainder[k] = exact - static_cast<double>(alloc[k]);
      allocated += alloc[k];
    }
    const auto target_total =
        static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
    // Largest remainder top-up; a class only gains a row while it stays below ceil(exact).
    std::vector<std::size_t> order(n_classes);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (const std::size_t k : order) {
      if (allocated >= target_total) break;
      if (remainder[k] > 0.0 && alloc[k] + 1 <= members[k].size() - 1) {
        ++alloc[k];
        ++allocated;
      }
    }
    for (std::size_t k = 0; k < n_classes; ++k) {
      shuffle(std::span<std::size_t>(members[k]), rng);
      for (std::size_t i = 0; i < alloc[k]; ++i) in_test[members[k][i]] = 1;
    }
  }

  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
  return out;
}

Dataset select_rows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.target.resize(rows.size());
  out.row_ids.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        data.features.row(static_cast<Eigen::Index>(rows[i]));
    out.target[i] = data.target[rows[i]];
    out.row_ids[i] = data.row_ids[rows[i]];
  }
  out.feature_names = data.feature_names;
  out.class_names = data.class_names;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  const SplitIndices idx =
      split_indices(data.target, data.n_classes(), spec, stream_id::kTrainTestSplit);
  return {select_rows(data, idx.train), select_rows(data, idx.test)};
}

FeatureMatrix gather_columns(const FeatureMatrix& features, std::span<const std::size_t> ids) {
  FeatureMatrix out(features.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = features.col(static_cast<Eigen::Index>(ids[j]));
  }
  return out;
}

std::string to_string(Discretizer d) {
  switch (d) {
    case Discretizer::equal_frequency: return "equal_frequency";
    case Discretizer::equal_width: return "equal_width";
    case Discretizer::passthrough_if_integral: return "passthrough_if_integral";
  }
  return "equal_frequency";
}

Discretizer discretizer_from_string(std::string_view s) {
  if (s == "equal_frequency") return Discretizer::equal_frequency;
  if (s == "equal_width") return Discretizer::equal_width;
  if (s == "passthrough_if_integral") return Discretizer::passthrough_if_integral;
  throw ConfigError("unknown discretizer '" + std::string(s) + "'");
}

std::string to_string(MissingPolicy p) {
  switch (p) {
    case MissingPolicy::reject: return "reject";
    case MissingPolicy::drop: return "drop";
    case MissingPolicy::median: return "median";
  }
  return "reject";
}

MissingPolicy missing_policy_from_string(std::string_view s) {
  if (s == "reject") return MissingPolicy::reject;
  if (s == "drop") return MissingPolicy::drop;
  if (s == "median") return MissingPolicy::median;
  throw ConfigError("unknown missing_policy '" + std::string(s) + "'");
}

}  // namespace spfp

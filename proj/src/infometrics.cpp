#include "spfp/infometrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace spfp {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("length mismatch between coded columns");
}

Code checked_cardinality(CodeColumn column) {
  Code max_code = 0;
  for (const Code c : column) {
    if (c < 0) throw std::invalid_argument("codes must be non-negative");
    max_code = std::max(max_code, c);
  }
  return max_code + 1;
}

double clamp_nonnegative(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace

double entropy_from_counts(std::span<const std::size_t> counts) {
  std::vector<std::size_t> sorted;
  sorted.reserve(counts.size());
  std::size_t total = 0;
  for (const std::size_t c : counts) {
    if (c == 0) continue;
    sorted.push_back(c);
    total += c;
  }
  if (sorted.size() <= 1) return 0.0;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (const std::size_t c : sorted) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return clamp_nonnegative(h);
}

double entropy(CodeColumn column) {
  if (column.empty()) throw std::invalid_argument("entropy of an empty column");
  std::vector<std::size_t> counts(static_cast<std::size_t>(checked_cardinality(column)), 0);
  for (const Code c : column) ++counts[static_cast<std::size_t>(c)];
  return entropy_from_counts(counts);
}

double joint_entropy(std::span<const CodeColumn> columns) {
  if (columns.empty()) throw std::invalid_argument("joint entropy needs at least one column");
  const std::size_t n = columns.front().size();
  if (n == 0) throw std::invalid_argument("joint entropy of empty columns");
  RowPartition p = RowPartition::trivial(n);
  for (const CodeColumn& col : columns) {
    require_same_length(n, col.size());
    p = p.refine(col);
  }
  return p.entropy();
}

double joint_entropy(CodeColumn x, CodeColumn y) {
  const CodeColumn cols[] = {x, y};
  return joint_entropy(cols);
}

double conditional_entropy(CodeColumn x, CodeColumn given) {
  require_same_length(x.size(), given.size());
  return clamp_nonnegative(joint_entropy(x, given) - entropy(given));
}

double mutual_information(CodeColumn x, CodeColumn y) {
  require_same_length(x.size(), y.size());
  return clamp_nonnegative(entropy(x) + entropy(y) - joint_entropy(x, y));
}

double conditional_mutual_information(CodeColumn x, CodeColumn y, CodeColumn given) {
  require_same_length(x.size(), y.size());
  require_same_length(x.size(), given.size());
  const CodeColumn xyz[] = {x, y, given};
  return clamp_nonnegative(joint_entropy(x, given) + joint_entropy(y, given) -
                           joint_entropy(xyz) - entropy(given));
}

double interaction_gain(CodeColumn x, CodeColumn y, CodeColumn target) {
  return mutual_information(x, y) - conditional_mutual_information(x, y, target);
}

double pearson_abs(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size());
  if (x.size() < 2) throw std::invalid_argument("pearson correlation needs at least 2 values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
}

// ---------------------------------------------------------------------------
// RowPartition
// ---------------------------------------------------------------------------

RowPartition RowPartition::trivial(std::size_t n_rows) {
  RowPartition p;
  p.group_id_.assign(n_rows, 0);
  if (n_rows > 0) p.group_sizes_.push_back(n_rows);
  return p;
}

RowPartition RowPartition::from_column(CodeColumn column) {
  return trivial(column.size()).refine(column);
}

RowPartition RowPartition::refine(CodeColumn column) const {
  require_same_length(n_rows(), column.size());
  const std::size_t n = n_rows();
  RowPartition out;
  out.group_id_.resize(n);
  if (n == 0) return out;
  const auto card = static_cast<std::size_t>(checked_cardinality(column));
  const std::size_t key_space = n_groups() * card;

  // Dense recoding of (old group, code); new ids follow first appearance.
  if (key_space <= 4 * n + 4096) {
    std::vector<Code> remap(key_space, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t key =
          static_cast<std::size_t>(group_id_[i]) * card + static_cast<std::size_t>(column[i]);
      Code& id = remap[key];
      if (id < 0) {
        id = static_cast<Code>(out.group_sizes_.size());
        out.group_sizes_.push_back(0);
      }
      out.group_id_[i] = id;
      ++out.group_sizes_[static_cast<std::size_t>(id)];
    }
  } else {
    std::unordered_map<std::size_t, Code> remap;
    remap.reserve(std::min(key_space, 2 * n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t key =
          static_cast<std::size_t>(group_id_[i]) * card + static_cast<std::size_t>(column[i]);
      auto [it, inserted] = remap.try_emplace(key, static_cast<Code>(out.group_sizes_.size()));
      if (inserted) out.group_sizes_.push_back(0);
      out.group_id_[i] = it->second;
      ++out.group_sizes_[static_cast<std::size_t>(it->second)];
    }
  }
  return out;
}

RowPartition RowPartition::refine(const RowPartition& other) const {
  return refine(other.group_ids());
}

RowPartition partition_of(const CodedMatrix& coded, std::span<const std::size_t> columns) {
  RowPartition p = RowPartition::trivial(coded.n_rows());
  for (const std::size_t j : columns) p = p.refine(coded.column(j));
  return p;
}

// ---------------------------------------------------------------------------
// Pairwise information in one pass
// ---------------------------------------------------------------------------

PairInformation pair_information(CodeColumn x, Code card_x, CodeColumn y, Code card_y,
                                 CodeColumn z, Code card_z) {
  require_same_length(x.size(), y.size());
  require_same_length(x.size(), z.size());
  const std::size_t n = x.size();
  if (n == 0) return {};
  const auto cx = static_cast<std::size_t>(card_x);
  const auto cy = static_cast<std::size_t>(card_y);
  const auto cz = static_cast<std::size_t>(card_z);
  std::vector<std::size_t> xyz(cx * cy * cz, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t key =
        (static_cast<std::size_t>(x[i]) * cy + static_cast<std::size_t>(y[i])) * cz +
        static_cast<std::size_t>(z[i]);
    ++xyz[key];
  }
  std::vector<std::size_t> xy(cx * cy, 0), xz(cx * cz, 0), yz(cy * cz, 0), xm(cx, 0), ym(cy, 0),
      zm(cz, 0);
  for (std::size_t a = 0; a < cx; ++a) {
    for (std::size_t b = 0; b < cy; ++b) {
      for (std::size_t c = 0; c < cz; ++c) {
        const std::size_t v = xyz[(a * cy + b) * cz + c];
        if (v == 0) continue;
        xy[a * cy + b] += v;
        xz[a * cz + c] += v;
        yz[b * cz + c] += v;
        xm[a] += v;
        ym[b] += v;
        zm[c] += v;
      }
    }
  }
  // sum c*log2(c); entropies follow as log2(n) - S/n.
  auto s = [](const std::vector<std::size_t>& counts) {
    double acc = 0.0;
    for (const std::size_t c : counts) {
      if (c > 1) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
    }
    return acc;
  };
  const double nd = static_cast<double>(n);
  const double mi = std::log2(nd) + (s(xy) - s(xm) - s(ym)) / nd;
  const double cmi = (s(xyz) + s(zm) - s(xz) - s(yz)) / nd;
  return {clamp_nonnegative(mi), clamp_nonnegative(cmi)};
}

// ---------------------------------------------------------------------------
// PairCache
// ---------------------------------------------------------------------------

PairCache::PairCache(const CodedMatrix& coded, CodeColumn target, Code n_classes)
    : coded_(&coded), target_(target), n_classes_(n_classes), rows_(coded.n_cols()) {
  require_same_length(coded.n_rows(), target.size());
}

void PairCache::reserve_row(std::size_t feature) {
  if (feature >= rows_.size()) throw std::out_of_range("PairCache row out of range");
  if (!rows_[feature]) rows_[feature] = std::make_unique<Cell[]>(rows_.size());
}

bool PairCache::has_row(std::size_t feature) const {
  return feature < rows_.size() && rows_[feature] != nullptr;
}

PairCache::Cell& PairCache::cell(std::size_t i, std::size_t j) {
  if (i >= rows_.size() || j >= rows_.size()) throw std::out_of_range("PairCache index");
  // Prefer the row of the smaller index when both exist so (i,j) and (j,i) share a cell.
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  if (rows_[lo]) return rows_[lo][hi];
  if (rows_[hi]) return rows_[hi][lo];
  throw std::logic_error("PairCache: neither row reserved");
}

void PairCache::fill(std::size_t i, std::size_t j, Cell& c) {
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  const auto info = pair_information(coded_->column(lo), coded_->cardinalities[lo],
                                     coded_->column(hi), coded_->cardinalities[hi], target_,
                                     n_classes_);
  c.mi.store(info.mi, std::memory_order_relaxed);
  c.cmi.store(info.cmi, std::memory_order_relaxed);
  fills_.fetch_add(1, std::memory_order_relaxed);
}

double PairCache::mi(std::size_t i, std::size_t j) {
  Cell& c = cell(i, j);
  double v = c.mi.load(std::memory_order_relaxed);
  if (std::isnan(v)) {
    fill(i, j, c);
    v = c.mi.load(std::memory_order_relaxed);
  }
  return v;
}

double PairCache::cmi(std::size_t i, std::size_t j) {
  Cell& c = cell(i, j);
  double v = c.cmi.load(std::memory_order_relaxed);
  if (std::isnan(v)) {
    fill(i, j, c);
    v = c.cmi.load(std::memory_order_relaxed);
  }
  return v;
}

}  // namespace spfp

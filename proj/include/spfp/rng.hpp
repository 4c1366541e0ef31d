#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spfp {

/// Counter-based generator: the i-th output of a stream with key k is
/// splitmix64_mix(k + (i + 1) * golden_gamma). Outputs depend only on
/// (key, counter), so results are identical across platforms and compilers.
///
/// Substreams: `Rng(master).substream(id)` has key
/// splitmix64_mix(master ^ splitmix64_mix(id + golden_gamma)). Stream ids used
/// by the library are listed in `stream_id`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed) {}

  [[nodiscard]] Rng substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  /// Uniform integer in [0, bound). Unbiased (rejection on the low word).
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

namespace stream_id {
inline constexpr std::uint64_t kTrainTestSplit = 1;
inline constexpr std::uint64_t kHoldoutSplit = 2;
inline constexpr std::uint64_t kViewRemovalBase = 0x100;      // + view index
inline constexpr std::uint64_t kBootstrapBase = 0x10000000;   // + replicate index
}  // namespace stream_id

/// In-place Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// `count` distinct elements drawn uniformly without replacement, in draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::span<const T> population, std::size_t count,
                                          Rng& rng) {
  std::vector<T> pool(population.begin(), population.end());
  if (count > pool.size()) count = pool.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace spfp

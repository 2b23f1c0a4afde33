#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace drr {

/// Counter-based pseudo-random stream.
///
/// Draw i (0-based) of a stream keyed by `key` is
///
///     mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
///
/// where mix64 is the SplitMix64 finalizer (Stafford variant 13). This is
/// exactly the SplitMix64 sequence seeded with `key`, so every platform with
/// 64-bit unsigned wraparound produces the same draws. Child streams are keyed
/// by hashing the parent key with an index (see `derive`), which keeps
/// parallel consumers independent of scheduling order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) noexcept : key_(seed) {}

  std::uint64_t seed() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Inclusive integer range [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) noexcept;

  /// Standard normal via Box-Muller (consumes two draws, no caching).
  double normal() noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates shuffle driven by `below`.
  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent stream keyed by (this key, path...). Does not advance *this.
  RngStream derive(std::initializer_list<std::uint64_t> path) const noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// FNV-1a 64-bit, used to key streams by string ids.
std::uint64_t hash_string(std::string_view s) noexcept;

}  // namespace drr

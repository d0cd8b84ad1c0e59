#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace purgelab {

/// Seeded generator used for every randomized step in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// derived draws (bounded integers, unit reals, normals, shuffles) are
/// implemented here with fully specified algorithms:
///   - uniform_index: Lemire's multiply-shift with rejection,
///   - uniform01: top 53 bits scaled by 2^-53,
///   - normal: Box-Muller, cosine branch then sine branch,
///   - shuffle: Fisher-Yates from the back.
/// Any implementation following the same recipe reproduces the same streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform real in [0, 1).
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal deviate.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive combination of seed components:
/// h = splitmix64(h ^ (c + 0x9e3779b97f4a7c15 + (h << 6) + (h >> 2))) per component.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

/// 64-bit FNV-1a of the bytes of text.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace purgelab

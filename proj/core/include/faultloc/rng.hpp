#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace faultloc {

/// Deterministic random source used everywhere a seed is involved.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are implementation-defined, so all
/// draws go through the helpers below, which produce identical streams on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a base seed and a tuple of keys,
  /// e.g. (seed, label_index, tree_index).
  static Rng substream(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> keys);

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t hash_string(std::string_view text);

}  // namespace faultloc

#ifndef MIWAF_RNG_HPP
#define MIWAF_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace miwaf {

/// Seeded generator whose derived draws are identical on every standard
/// library. The std distributions and std::shuffle are implementation
/// defined, so bounded integers and shuffles are done here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T> void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

} // namespace miwaf

#endif

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace relhop {

/// splitmix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream split: the seed of a work cell is a pure function of
/// the master seed and the cell coordinates, independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// 64-bit Mersenne twister with portable uniform draws. The standard
/// distributions are implementation-defined, so they are avoided to keep
/// output bit-identical across standard libraries.
class Rng {
  __extension__ typedef unsigned __int128 Wide;

 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) {
    auto product = static_cast<Wide>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(product);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        product = static_cast<Wide>(engine_()) * n;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Fair coin mapped to {-1, +1}.
  int sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

 private:
  Engine engine_;
};

}  // namespace relhop

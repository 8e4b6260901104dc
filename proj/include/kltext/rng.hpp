#ifndef KLTEXT_RNG_HPP
#define KLTEXT_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace kltext {

/*
 Deterministic random source shared by the GA and the synthetic corpus
 generator.

 The engine is std::mt19937_64, whose output sequence is fixed by the C++
 standard. The standard distributions are NOT portable across library
 implementations, so the helpers below derive bounded integers and unit
 reals directly from raw engine output:

   uniform_index(n)  rejection sampling on the top of the 64-bit range
   uniform01()       top 53 bits scaled by 2^-53, in [0, 1)
   bernoulli(p)      uniform01() < p

 Each helper consumes a documented number of engine draws (one per call,
 plus rejected draws for uniform_index), so a run is replayable from its
 seed on any platform.
*/
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kltext

#endif  // KLTEXT_RNG_HPP

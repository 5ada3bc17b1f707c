#ifndef INVARTEST_RNG_HPP
#define INVARTEST_RNG_HPP

#include <cmath>
#include <cstdint>

namespace invartest {

// SplitMix64 stream with counter-derived substreams.
//
// Monte Carlo work in this project keys every replicate (or verifier trial)
// to substream(seed, index).  The (seed, index) -> stream mapping is pure
// 64-bit integer arithmetic, so a run is reproducible across platforms and
// independent of how replicates are distributed over worker threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  // Finalizer of the splitmix64 step; also used to hash (seed, index) pairs.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed + 0x9E3779B97F4A7C15ull * (index + 1)));
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform on [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double next_open01() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Standard normal via Box-Muller; the second member of each pair is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586477 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace invartest

#endif  // INVARTEST_RNG_HPP

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace phrasemt {

// Deterministic random stream with an observable position.  Identical seed
// plus identical call sequence yields identical draws; (seed, position) is
// enough to reconstruct the state.  Normals are generated by Box-Muller
// without caching so every draw consumes a fixed number of engine steps.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) : seed_(seed), state_(split_mix(seed)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64() {
    // xorshift64* over a splitmix-initialised state
    ++position_;
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Standard normal; two engine steps per draw.
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::vector<double> normals(std::size_t n, double sigma = 1.0) {
    std::vector<double> out(n);
    for (auto& x : out) x = sigma * normal();
    return out;
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

  // Independent child stream; stable under unrelated draws on the parent.
  RngState fork(std::uint64_t stream) const {
    return RngState(split_mix(seed_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1))));
  }

  static std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    x = x ^ (x >> 31);
    return x ? x : 0x4d595df4d0f33173ULL;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_ = 1;
  std::uint64_t position_ = 0;
};

}  // namespace phrasemt

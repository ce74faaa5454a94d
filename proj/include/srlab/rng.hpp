#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace srlab {

// SplitMix64, used to expand a seed into generator state.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ (Blackman & Vigna reference implementation).
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_;
};

// Mixes a master seed with a stream index.  Work item i always draws from
// stream derive_seed(master, i), so results are independent of how items are
// distributed over threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 sm(master ^ (0x9E3779B97F4A7C15ull * (index + 1)));
  sm.next();
  return sm.next();
}

// Deterministic random stream.  Uniforms use the top 53 bits; normals use
// Box-Muller with a cached spare.  std::normal_distribution is avoided on
// purpose: its output is implementation-defined and would break bitwise
// reproducibility contracts.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  static RandomStream for_index(std::uint64_t master, std::uint64_t index) {
    return RandomStream(derive_seed(master, index));
  }

  // in [0, 1)
  double uniform() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(gen_.next() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t bits() { return gen_.next(); }

 private:
  Xoshiro256pp gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace srlab

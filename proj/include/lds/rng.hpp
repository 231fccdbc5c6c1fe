#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lds {

// Counter-based generation: every draw is a pure function of (seed, key),
// so lattice fills and path pools are order independent and exactly
// reproducible under any parallel schedule.

inline uint64_t splitmix64_step(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
  uint64_t z = splitmix64_step(s);
  return splitmix64_step(s) ^ z;
}

// Uniform in (0,1]; never returns 0 so log(u) is always finite.
inline double u01(uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Lattice sites packed into 21-bit signed fields; supports |coord| < 2^20,
// far beyond any box reachable at desk-scale horizons.
inline uint64_t pack_site(const std::array<int, 3>& site, int dim) {
  uint64_t key = 0;
  for (int a = 0; a < dim; ++a) {
    uint64_t field = static_cast<uint64_t>(static_cast<int64_t>(site[a]) + (1 << 20)) & 0x1FFFFFull;
    key |= field << (21 * a);
  }
  return key | (static_cast<uint64_t>(dim) << 62);
}

// Sequential stream for path simulation; one instance per path, seeded
// from (seed, path index) through mix64.
class Prng {
 public:
  explicit Prng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64_step(state_); }

  double uniform() { return u01(next_u64()); }

  // Box-Muller with a cached spare.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lds

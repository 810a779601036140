#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rpf {

// Stable 64-bit mixer used to derive per-worker seeds. Results must not depend
// on scheduling, so every parallel unit gets its own seed up front.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master + 0x632be59bd9b4e019ULL) ^ splitmix64(stream));
}

// mt19937_64 with explicit draw helpers. The standard <random> distributions
// are implementation-defined, which would break frozen test values and
// byte-identical reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n); n > 0
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(bits() % n); }

  // standard normal via the polar method
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rpf

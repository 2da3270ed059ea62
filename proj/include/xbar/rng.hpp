#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace xbar {

// Self-contained xoshiro256++ generator. The standard-library distributions are
// not bit-reproducible across implementations, and run manifests promise
// byte-identical outputs, so sampling is done by hand here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  /// Standard normal via the polar (Marsaglia) method.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Lognormal factor with mean exactly 1 and standard deviation rel_sigma.
  double lognormal_unit_mean(double rel_sigma) {
    if (rel_sigma <= 0.0) return 1.0;
    const double s2 = std::log1p(rel_sigma * rel_sigma);
    const double mu = -0.5 * s2;
    return std::exp(mu + std::sqrt(s2) * gaussian());
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives a named sub-stream seed from a master seed. All randomness in a run
/// flows from one master seed through streams named like "device", "plan:3:12".
inline std::uint64_t substream(std::uint64_t master, std::string_view name) {
  std::uint64_t x = master ^ fnv1a64(name);
  return Rng::splitmix64(x);
}

/// Convenience for indexed streams without string formatting in hot loops.
inline std::uint64_t substream(std::uint64_t master, std::string_view name, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t x = master ^ fnv1a64(name);
  x = Rng::splitmix64(x) ^ (a * 0x9e3779b97f4a7c15ULL);
  x = Rng::splitmix64(x) ^ (b * 0xb5297a4d3c2c4361ULL);
  x = Rng::splitmix64(x) ^ (c * 0x68e31da4a1c6c6a5ULL);
  return Rng::splitmix64(x);
}

} // namespace xbar

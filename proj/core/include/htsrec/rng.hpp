#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace htsrec {

/// Deterministic random source built on std::mt19937_64, whose output stream
/// is pinned by the standard, so fixed seeds replay bit-identically.
///
/// Seeding scheme: a generator remembers the seed it was built from, and
/// `substream(tag)` derives an independent child generator by passing
/// (seed, tag) through two rounds of SplitMix64. Drivers use one tag per
/// noise source / rolling origin / replication, which keeps parallel and
/// serial runs identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng substream(std::uint64_t tag) const {
    return Rng(splitmix(seed_ + splitmix(tag ^ 0x9e3779b97f4a7c15ull)));
  }

  /// Uniform on (0, 1), endpoints excluded.
  double uniform() {
    // 53-bit mantissa, shifted into the open interval.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
  }

  /// Standard normal via Box-Muller; the paired value is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi() * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by
  /// boosting to shape + 1 and scaling with u^(1/shape).
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  static constexpr double pi() { return 3.141592653589793238462643383279502884; }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace htsrec

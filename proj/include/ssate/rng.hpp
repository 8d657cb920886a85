#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ssate {

// Deterministic random streams.  The engine is std::mt19937_64 (bit-exact by
// the standard); all distributions are implemented here because the standard
// library's are implementation-defined.  A stream is addressed by
// (seed, a, b, c) so replications / resampling draws can derive independent
// substreams that do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed, 0, 0, 0); }
  Rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    reseed(seed, a, b, c);
  }

  void reseed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
        static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
        static_cast<std::uint32_t>(c),    static_cast<std::uint32_t>(c >> 32)};
    eng_.seed(seq);
    has_cached_ = false;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform01_pos() { return 1.0 - uniform01(); }

  // Standard normal via Box-Muller, second value cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01_pos();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 boosted via U^{1/shape}.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform01_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform01_pos();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double ga = gamma(a);
    double gb = gamma(b);
    return ga / (ga + gb);
  }

  // Uniform integer in [0, n) without modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 eng_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace ssate

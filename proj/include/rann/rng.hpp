#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rann {

// splitmix64 step; used as a seed mixer so that per-purpose streams derived
// from one master seed are statistically independent.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives the seed of stream `stream`, element `index`, from a master seed.
/// Counter-based: no RNG state is shared between streams, so any (stream,
/// index) cell can be regenerated independently and reproducibly.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= (stream + 1) * 0xd1342543de82ef95ULL;
  h ^= splitmix64(s);
  s ^= (index + 1) * 0xaf251af3b0f025b5ULL;
  h ^= splitmix64(s);
  return h;
}

// Seed streams used by the harness and samplers. Values are arbitrary but
// fixed; changing them changes every derived sample.
enum SeedStream : std::uint64_t {
  kStreamHidden = 1,
  kStreamCollocation = 2,
  kStreamEval = 3,
  kStreamCell = 4,
  kStreamEstimator = 5,
};

/// Deterministic random source. The engine is mt19937_64 (exact sequence
/// pinned by the standard); all value transforms are implemented here rather
/// than with std::*_distribution so that sample streams are identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform_on(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Standard Cauchy.
  double cauchy() { return std::tan(M_PI * (uniform() - 0.5)); }

  /// Gamma(shape, scale=1), Marsaglia-Tsang; shape < 1 via the boost trick.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rann

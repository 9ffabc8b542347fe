#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace dofinetti {

/// Counter-based 64-bit generator (SplitMix64). The state advances by a fixed
/// increment and each output is a bijective mix of the counter, so streams
/// derived from distinct keys never overlap in practice. Deterministic across
/// platforms, unlike the distributions in <random>.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1), safe as a log/division argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift rejection-free mapping; bias is ~n/2^64, negligible here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via the Marsaglia polar method (no cached spare, so the
  /// stream position is a pure function of the draws made).
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shapes below 1 use the boost
  /// Gamma(shape+1) * U^(1/shape).
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
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
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double alpha, double beta_param) {
    const double a = gamma(alpha);
    const double b = gamma(beta_param);
    return a / (a + b);
  }

  /// Symmetric Dirichlet over `dim` categories.
  std::vector<double> dirichlet(double concentration, std::size_t dim) {
    std::vector<double> out(dim);
    double total = 0.0;
    for (auto& v : out) {
      v = gamma(concentration);
      total += v;
    }
    for (auto& v : out) v /= total;
    return out;
  }

 private:
  std::uint64_t state_;
};

/// Derives a stream key from a seed and a tuple of labels, e.g.
/// derive_stream(master, {num_envs, repeat, kDataStream}). Built by chaining
/// SplitMix64 mixes, so (seed, labels) -> key is stationary and collision-poor.
inline std::uint64_t derive_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> labels) {
  SplitMix64 mixer(seed);
  std::uint64_t key = mixer.next_u64();
  for (const std::uint64_t label : labels) {
    SplitMix64 step(key ^ (label + 0x9E3779B97F4A7C15ull));
    key = step.next_u64();
  }
  return key;
}

}  // namespace dofinetti

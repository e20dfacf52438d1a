#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "aitv/errors.hpp"
#include "aitv/image.hpp"

namespace aitv {

/// Target peak of the rescaled clean image plus the RNG seed; together with
/// the clean image this fully determines the corrupted output.
struct NoiseSpec {
  double peak = 30.0;
  std::uint64_t seed = 0;
};

namespace rng {

/// SplitMix64 (Steele, Lea, Flood 2014). Tiny, seedable, and splittable:
/// disjoint substreams are derived by hashing (seed, index), which is what
/// keeps per-row sampling order-independent.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return (next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
  return g.next();
}

/// One Poisson draw. Knuth's product method below mean 10, Hormann's
/// transformed rejection (PTRS) above; the split is the usual
/// accuracy/speed trade. Only distributional correctness and same-platform
/// determinism are promised, not a specific bit stream across platforms.
inline double poisson_sample(double mean, SplitMix64& gen) {
  if (mean < 0.0) throw NegativeMean("poisson mean must be >= 0");
  if (mean == 0.0) return 0.0;

  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    double prod = 1.0;
    double count = 0.0;
    while (true) {
      prod *= gen.next_double();
      if (prod > limit)
        count += 1.0;
      else
        return count;
    }
  }

  // PTRS (Hormann 1993).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = gen.next_double() - 0.5;
    const double v = gen.next_double();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return kf;
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        kf * loglam - mean - std::lgamma(kf + 1.0))
      return kf;
  }
}

}  // namespace rng

/// Multiplies every pixel by peak / max(g) so the output peaks at exactly
/// the requested value.
inline Image rescale_to_peak(const Image& g, double peak) {
  if (!(peak > 0.0)) throw InvalidConfig("peak must be > 0");
  const double current = max_value(g);
  if (!(current > 0.0))
    throw AllZeroImage("cannot rescale an image with no positive intensity");
  const double scale = peak / current;
  Image out(g.rows(), g.cols());
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = g[k] * scale;
  return out;
}

/// Independent Poisson draw per pixel with mean g(i,j). Each row samples
/// from its own derived substream, so the result is reproducible from
/// (g, seed) alone no matter how rows are scheduled.
inline Image poisson_corrupt(const Image& g, const NoiseSpec& spec) {
  if (min_value(g) < 0.0)
    throw NegativeMean("poisson_corrupt requires nonnegative means");
  Image f(g.rows(), g.cols());
  for (int i = 0; i < g.rows(); ++i) {
    rng::SplitMix64 gen(rng::derive_stream(spec.seed, i));
    for (int j = 0; j < g.cols(); ++j) f(i, j) = rng::poisson_sample(g(i, j), gen);
  }
  return f;
}

}  // namespace aitv

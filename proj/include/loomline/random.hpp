#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace loomline {

/**
 * Seeded, platform-independent pseudo-random stream.
 *
 * Generator: xoshiro256** (Blackman & Vigna). The 256-bit state is filled by
 * four SplitMix64 outputs seeded with `seed XOR FNV-1a-64(label)`. Doubles
 * use the top 53 bits of each output. Normal variates use Box-Muller; no
 * standard-library distribution is involved, so draw sequences match across
 * compilers and standard libraries.
 *
 * tests/oracles/rng_reference.py is an independent reference implementation.
 */
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string label);

  /// Substream keyed by "<label>/<child_label>" under the same seed.
  [[nodiscard]] RandomStream child(std::string_view child_label) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in (0, 1].
  double uniform_open_low();
  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  /// True with probability p; p <= 0 is never true, p >= 1 always.
  bool bernoulli(double p);
  /// Index drawn proportionally to non-negative weights (sum must be > 0).
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::array<std::uint64_t, 4> state_{};
};

/// Independent substream for (seed, label).
RandomStream derive_stream(std::uint64_t seed, std::string_view label);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace loomline

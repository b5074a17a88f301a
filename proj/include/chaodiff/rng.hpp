#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace chaodiff {

/// Seeded random stream with deterministic, counter-based child streams.
///
/// `split(i)` never consumes draws from the parent, so per-sample and
/// per-stage streams are independent of the order in which they are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  Rng split(std::uint64_t stream) const;
  Rng split(std::string_view name) const;

  double uniform();
  double uniform(double lo, double hi);
  double normal();
  std::uint64_t next_u64();
  /// Index drawn from an unnormalized nonnegative weight vector.
  std::size_t categorical(std::span<const double> weights);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace chaodiff

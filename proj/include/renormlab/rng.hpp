#pragma once

#include <cstdint>
#include <string_view>

namespace renormlab {

/// Counter-based generator: the n-th draw is a pure function of (key, n).
///
/// Streams are split by label or index, so any suite, sample or task can
/// obtain its own reproducible stream from one root seed regardless of the
/// order in which work is scheduled. Floating conversions are done here
/// rather than through <random> distributions, whose output is not
/// specified across standard library implementations.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::string_view label = {});

  [[nodiscard]] CounterRng split(std::string_view label) const;
  [[nodiscard]] CounterRng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// +1.0 or -1.0 with equal probability.
  double sign();

  [[nodiscard]] std::uint64_t key() const { return key_; }

 private:
  CounterRng(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_label(std::string_view label);

}  // namespace renormlab

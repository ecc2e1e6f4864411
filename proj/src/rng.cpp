#include "renormlab/rng.hpp"

#include <stdexcept>

namespace renormlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a
std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CounterRng::CounterRng(std::uint64_t seed, std::string_view label)
    : key_(splitmix64(seed ^ splitmix64(hash_label(label)))) {}

CounterRng CounterRng::split(std::string_view label) const {
  return CounterRng(splitmix64(key_ ^ hash_label(label)), 0, 0);
}

CounterRng CounterRng::split(std::uint64_t index) const {
  return CounterRng(splitmix64(key_ + 0x632be59bd9b4e019ULL * (index + 1)), 0, 0);
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t n = counter_++;
  return splitmix64(key_ ^ splitmix64(n));
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("CounterRng::below: empty range");
  }
  // Rejection removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = next_u64();
  while (v >= limit) {
    v = next_u64();
  }
  return v % n;
}

double CounterRng::sign() { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

}  // namespace renormlab

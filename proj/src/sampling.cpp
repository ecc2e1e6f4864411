#include "renormlab/sampling.hpp"

#include "renormlab/errors.hpp"

namespace renormlab {

std::vector<Index> coordinate_range(Index first, std::size_t count) {
  std::vector<Index> c(count);
  for (std::size_t i = 0; i < count; ++i) {
    c[i] = first + i;
  }
  return c;
}

SparseVector random_vector(CounterRng& rng, std::span<const Index> coords, double scale,
                           double density) {
  if (coords.empty()) {
    throw ParameterError("random_vector: no coordinates");
  }
  std::vector<SparseVector::Entry> entries;
  entries.reserve(coords.size());
  for (Index c : coords) {
    if (density >= 1.0 || rng.uniform() < density) {
      double v = rng.uniform(-scale, scale);
      if (v != 0.0) {
        entries.emplace_back(c, v);
      }
    }
  }
  if (entries.empty()) {
    const Index c = coords[rng.below(coords.size())];
    entries.emplace_back(c, scale * rng.sign() * (0.5 + 0.5 * rng.uniform()));
  }
  return SparseVector::from_entries(std::move(entries));
}

SparseVector random_unit_vector(CounterRng& rng, std::span<const Index> coords,
                                const NormOracle& n, double density) {
  SparseVector v = random_vector(rng, coords, 1.0, density);
  const double scale = 1.0 / n(v);
  return scale * std::move(v);
}

}  // namespace renormlab

#pragma once

#include <span>
#include <vector>

#include "renormlab/rng.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

/// Coordinates first, first+1, ..., first+count-1.
std::vector<Index> coordinate_range(Index first, std::size_t count);

/// Random vector over the given coordinates. Each coordinate is kept with
/// probability `density` and drawn uniformly from [-scale, scale]. At least
/// one coordinate is always populated, so the result is non-zero.
SparseVector random_vector(CounterRng& rng, std::span<const Index> coords, double scale = 1.0,
                           double density = 1.0);

/// random_vector rescaled to unit norm under n.
SparseVector random_unit_vector(CounterRng& rng, std::span<const Index> coords,
                                const NormOracle& n, double density = 1.0);

}  // namespace renormlab

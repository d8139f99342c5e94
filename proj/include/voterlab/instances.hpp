#pragma once

#include <vector>

#include "voterlab/generators.hpp"
#include "voterlab/kernel.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

/// Random irreducible kernel: each off-diagonal entry is kept with
/// probability `density` and weighted uniformly on (0, 1], rows normalized.
/// Draws are repeated until the support is strongly connected; after 100
/// failures the cycle x -> x + 1 is added to the last draw.
Kernel random_kernel(std::size_t n, CounterRng& rng, double density = 1.0);

/// Random weights on `types` points with total mass uniform on (0, max_total].
MutationMeasure random_mutation(std::size_t types, double max_total, CounterRng& rng);

Configuration random_configuration(std::size_t sites, std::size_t types, CounterRng& rng);

/// Random probability vector with `atoms` positive entries among `types`.
FiniteMeasure random_measure(std::size_t types, std::size_t atoms, CounterRng& rng);

/// Product test function with k factors uniform on [-scale, scale].
ProductTestFunction random_product_function(std::size_t k, std::size_t types, double scale, CounterRng& rng);

/// Pair function uniform on [-scale, scale]; zero diagonal when requested.
PairTestFunction random_pair_function(std::size_t types, double scale, bool zero_diagonal, CounterRng& rng);

/// Type space of `points` uniform points in [0, 1]^dim with Euclidean distance.
TypeSpace random_euclidean_space(std::size_t points, std::size_t dim, CounterRng& rng);

}  // namespace voterlab

#pragma once

#include <functional>
#include <vector>

#include "voterlab/kernel.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

/// Receives the index of the grid time and the configuration at that time.
using VoterObserver = std::function<void(std::size_t, const Configuration&)>;

/// Direct event-driven simulation of the voter model with mutation. Events
/// arrive at total rate N (1 + mu(1)); the chosen site either copies a
/// q-distributed neighbour or takes a mu-distributed type. `times` must be
/// nondecreasing and nonnegative; xi is advanced in place to times.back().
void simulate_voter(const Kernel& kernel, const MutationMeasure& mu, Configuration& xi,
                    const std::vector<double>& times, CounterRng& rng, const VoterObserver& observe);

/// All sites carry distinct types 0, 1, ..., N - 1.
Configuration distinct_configuration(std::size_t sites);

/// Deterministic configuration whose type counts follow `weights`: site x
/// gets the type whose cumulative-weight interval contains (x + 1/2) / N.
Configuration proportional_configuration(std::size_t sites, const std::vector<double>& weights);

}  // namespace voterlab

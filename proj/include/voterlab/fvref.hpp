#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "voterlab/generators.hpp"
#include "voterlab/parallel.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

/// Fleming-Viot law with parent-independent mutation. Without an initial
/// measure the start is nonatomic: every ancestral lineage gets its own label.
struct FVSpec {
    std::optional<FiniteMeasure> initial;
    MutationMeasure mutation;

    bool nonatomic() const noexcept { return !initial.has_value(); }
};

/// One sampled individual. Two samples carry the same type in the nonatomic
/// case exactly when their origins agree.
struct FVDraw {
    Type type = 0;            // meaningless for ancestral draws from a nonatomic start
    std::uint64_t origin = 0; // ancestral lineage or mutation event
    bool ancestral = false;   // type inherited from X_0 rather than a mutation
};

/// n-sample of X_t: Kingman n-coalescent run backward for time t, lineages
/// killed at rate mu(1) and given a mu/mu(1) type, survivors typed from X_0.
std::vector<FVDraw> fv_sample_types(const FVSpec& spec, std::size_t n, double t, CounterRng& rng);

/// True when the two draws carry the same type.
bool same_type(const FVSpec& spec, const FVDraw& a, const FVDraw& b) noexcept;

/// E prod <f_i, X_t> from k-samples; needs an atomic start and at least
/// 10^3 replicas.
Estimate fv_moment(const FVSpec& spec, const ProductTestFunction& phi, double t, std::size_t replicas,
                   std::uint64_t seed, Parallelism par = {});

/// P(two draws from X_t share a type) = E Div(X_t), by sampling.
Estimate fv_pair_identity(const FVSpec& spec, double t, std::size_t replicas, std::uint64_t seed,
                          Parallelism par = {});

/// Probability that two draws from X_t descend from one ancestor without an
/// intervening mutation, from a nonatomic start:
/// (1 - e^{-(1 + 2 theta) t}) / (1 + 2 theta). This is E Div(X_t) when
/// mutants never repeat a type; with an atomic mutation measure two
/// independent mutants can also match, which fv_pair_identity accounts for.
double fv_diversity_mean(double theta, double t);

/// P(Kingman block count at time t <= j) from infinitely many lineages,
/// through kingman_tail_sample.
Estimate fv_blockcount_dist(std::size_t j, double t, std::size_t replicas, std::uint64_t seed,
                            Parallelism par = {}, double tol = 1e-4);

/// Same probability from a finite n_start-lineage coalescent.
Estimate fv_blockcount_direct(std::size_t j, double t, std::size_t replicas, std::uint64_t seed,
                              std::size_t n_start = 2000, Parallelism par = {});

/// Kingman block count at time t started from infinity (truncated at
/// kingman_levels(tol)).
std::size_t kingman_block_count(double t, CounterRng& rng, double tol = 1e-4);

/// Block counts of one Kingman path from infinity at each of the
/// nondecreasing positive times.
std::vector<std::size_t> kingman_block_counts(const std::vector<double>& times, CounterRng& rng,
                                              double tol = 1e-4);

/// Atom masses uniform on the (k - 1)-simplex, sorted nonincreasing.
std::vector<double> uniform_simplex_masses(std::size_t k, CounterRng& rng);

/// Atom masses of X_t for mu = 0 and a nonatomic start: a Kingman block
/// count k, then masses uniform on the (k - 1)-simplex.
std::vector<double> fv_atom_masses(double t, CounterRng& rng, double tol = 1e-4);

}  // namespace voterlab

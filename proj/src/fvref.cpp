#include "voterlab/fvref.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "voterlab/coalescent.hpp"

namespace voterlab {

namespace {

void check_spec(const FVSpec& spec)
{
    if (spec.initial) {
        if (!spec.initial->is_probability(1e-9)) throw std::invalid_argument("fv: initial measure must be a probability");
        if (spec.mutation.size() != 0 && spec.mutation.size() != spec.initial->size())
            throw std::invalid_argument("fv: initial and mutation measures live on different type spaces");
    }
}

}  // namespace

std::vector<FVDraw> fv_sample_types(const FVSpec& spec, std::size_t n, double t, CounterRng& rng)
{
    if (n < 1) throw std::invalid_argument("fv_sample_types: n must be at least 1");
    if (!(t >= 0.0)) throw std::invalid_argument("fv_sample_types: t must be nonnegative");
    check_spec(spec);

    const double theta = spec.mutation.total();
    AliasTable marks;
    if (theta > 0.0) marks = AliasTable(spec.mutation.weights());
    AliasTable ancestors;
    if (spec.initial) ancestors = AliasTable(spec.initial->weights);

    // Each active lineage holds the sample indices below it.
    std::vector<std::vector<std::size_t>> lineages(n);
    for (std::size_t i = 0; i < n; ++i) lineages[i] = {i};
    std::vector<FVDraw> out(n);
    std::uint64_t next_origin = 0;
    auto settle = [&](std::size_t lineage, FVDraw draw) {
        for (std::size_t i : lineages[lineage]) out[i] = draw;
        lineages[lineage] = std::move(lineages.back());
        lineages.pop_back();
    };

    double clock = 0.0;
    while (!lineages.empty()) {
        const auto k = static_cast<double>(lineages.size());
        const double merge_rate = 0.5 * k * (k - 1.0);
        const double kill_rate = k * theta;
        const double total = merge_rate + kill_rate;
        if (total == 0.0) break;
        clock += rng.exponential(total);
        if (clock > t) break;
        if (rng.uniform() * total < merge_rate) {
            const auto a = static_cast<std::size_t>(rng.below(lineages.size()));
            auto b = static_cast<std::size_t>(rng.below(lineages.size() - 1));
            if (b >= a) ++b;
            lineages[a].insert(lineages[a].end(), lineages[b].begin(), lineages[b].end());
            lineages[b] = std::move(lineages.back());
            lineages.pop_back();
        } else {
            const auto victim = static_cast<std::size_t>(rng.below(lineages.size()));
            settle(victim, {static_cast<Type>(marks.sample(rng)), next_origin++, false});
        }
    }
    while (!lineages.empty()) {
        const Type type = spec.initial ? static_cast<Type>(ancestors.sample(rng)) : Type{0};
        settle(lineages.size() - 1, {type, next_origin++, true});
    }
    return out;
}

bool same_type(const FVSpec& spec, const FVDraw& a, const FVDraw& b) noexcept
{
    if (spec.nonatomic() && (a.ancestral || b.ancestral)) return a.ancestral && b.ancestral && a.origin == b.origin;
    return a.type == b.type;
}

Estimate fv_moment(const FVSpec& spec, const ProductTestFunction& phi, double t, std::size_t replicas,
                   std::uint64_t seed, Parallelism par)
{
    if (spec.nonatomic()) throw std::invalid_argument("fv_moment: needs an atomic initial measure");
    if (replicas < 1000) throw std::invalid_argument("fv_moment: at least 10^3 replicas required");
    if (phi.types() != spec.initial->size()) throw std::invalid_argument("fv_moment: test function type count mismatch");
    check_spec(spec);
    std::vector<double> values(replicas);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        const auto draws = fv_sample_types(spec, phi.order(), t, rng);
        double p = 1.0;
        for (std::size_t i = 0; i < phi.order(); ++i) p *= phi.factor(i)[draws[i].type];
        values[r] = p;
    });
    return mean_estimate(values);
}

Estimate fv_pair_identity(const FVSpec& spec, double t, std::size_t replicas, std::uint64_t seed, Parallelism par)
{
    if (replicas < 2) throw std::invalid_argument("fv_pair_identity: at least two replicas required");
    std::vector<double> values(replicas);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        const auto draws = fv_sample_types(spec, 2, t, rng);
        values[r] = same_type(spec, draws[0], draws[1]) ? 1.0 : 0.0;
    });
    return mean_estimate(values);
}

double fv_diversity_mean(double theta, double t)
{
    if (!(theta >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("fv_diversity_mean: theta and t must be nonnegative");
    const double rate = 1.0 + 2.0 * theta;
    return -std::expm1(-rate * t) / rate;
}

Estimate fv_blockcount_dist(std::size_t j, double t, std::size_t replicas, std::uint64_t seed, Parallelism par,
                            double tol)
{
    if (replicas < 2) throw std::invalid_argument("fv_blockcount_dist: at least two replicas required");
    std::vector<double> hits(replicas);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        hits[r] = kingman_tail_sample(j, rng, tol) <= t ? 1.0 : 0.0;
    });
    return mean_estimate(hits);
}

Estimate fv_blockcount_direct(std::size_t j, double t, std::size_t replicas, std::uint64_t seed,
                              std::size_t n_start, Parallelism par)
{
    if (j < 1 || n_start < j) throw std::invalid_argument("fv_blockcount_direct: need 1 <= j <= n_start");
    if (replicas < 2) throw std::invalid_argument("fv_blockcount_direct: at least two replicas required");
    std::vector<double> hits(replicas);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        double clock = 0.0;
        std::size_t k = n_start;
        while (k > j) {
            const double d = static_cast<double>(k);
            clock += rng.exponential(0.5 * d * (d - 1.0));
            if (clock > t) break;
            --k;
        }
        hits[r] = k <= j ? 1.0 : 0.0;
    });
    return mean_estimate(hits);
}

std::vector<std::size_t> kingman_block_counts(const std::vector<double>& times, CounterRng& rng, double tol)
{
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0) || (i > 0 && times[i] < times[i - 1]))
            throw std::invalid_argument("kingman_block_counts: times must be positive and nondecreasing");
    std::vector<std::size_t> counts(times.size(), 1);
    std::size_t k = kingman_levels(tol);
    std::size_t next = 0;
    double clock = 0.0;
    while (k > 1 && next < times.size()) {
        const double d = static_cast<double>(k);
        clock += rng.exponential(0.5 * d * (d - 1.0));
        while (next < times.size() && clock > times[next]) counts[next++] = k;
        --k;
    }
    return counts;
}

std::size_t kingman_block_count(double t, CounterRng& rng, double tol)
{
    return kingman_block_counts({t}, rng, tol).front();
}

std::vector<double> uniform_simplex_masses(std::size_t k, CounterRng& rng)
{
    if (k < 1) throw std::invalid_argument("uniform_simplex_masses: k must be at least 1");
    std::vector<double> masses(k);
    double total = 0.0;
    for (double& m : masses) total += (m = rng.exponential(1.0));
    for (double& m : masses) m /= total;
    std::sort(masses.begin(), masses.end(), std::greater<>());
    return masses;
}

std::vector<double> fv_atom_masses(double t, CounterRng& rng, double tol)
{
    return uniform_simplex_masses(kingman_block_count(t, rng, tol), rng);
}

}  // namespace voterlab

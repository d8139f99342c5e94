#include "voterlab/voter.hpp"

#include <numeric>
#include <stdexcept>

namespace voterlab {

void simulate_voter(const Kernel& kernel, const MutationMeasure& mu, Configuration& xi,
                    const std::vector<double>& times, CounterRng& rng, const VoterObserver& observe)
{
    const std::size_t n = kernel.size();
    if (xi.size() != n) throw std::invalid_argument("simulate_voter: configuration size does not match the kernel");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1]))
            throw std::invalid_argument("simulate_voter: times must be nonnegative and nondecreasing");

    const double mutation_rate = mu.total();
    const double total_rate = static_cast<double>(n) * (1.0 + mutation_rate);
    const double copy_share = 1.0 / (1.0 + mutation_rate);
    AliasTable marks;
    if (mutation_rate > 0.0) marks = AliasTable(mu.weights());

    double clock = 0.0;
    double next = rng.exponential(total_rate);
    for (std::size_t i = 0; i < times.size(); ++i) {
        while (next <= times[i]) {
            clock = next;
            const auto x = static_cast<Site>(rng.below(n));
            if (mutation_rate == 0.0 || rng.uniform() < copy_share)
                xi[x] = xi[kernel.sample_target(x, rng)];
            else
                xi[x] = static_cast<Type>(marks.sample(rng));
            next = clock + rng.exponential(total_rate);
        }
        if (observe) observe(i, xi);
    }
}

Configuration distinct_configuration(std::size_t sites)
{
    Configuration xi(sites);
    std::iota(xi.begin(), xi.end(), Type{0});
    return xi;
}

Configuration proportional_configuration(std::size_t sites, const std::vector<double>& weights)
{
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(total > 0.0)) throw std::invalid_argument("initial weights must have a positive sum");
    for (double w : weights)
        if (!(w >= 0.0)) throw std::invalid_argument("initial weights must be nonnegative");
    Configuration xi(sites);
    std::size_t type = 0;
    double upper = weights[0] / total;
    for (std::size_t x = 0; x < sites; ++x) {
        const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(sites);
        while (u > upper && type + 1 < weights.size()) upper += weights[++type] / total;
        xi[x] = static_cast<Type>(type);
    }
    return xi;
}

}  // namespace voterlab

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "voterlab/kernel.hpp"
#include "voterlab/parallel.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/stats.hpp"

namespace voterlab {

/// Coalescing rate-1 q-chains. Label i starts at starts[i]; labels that meet
/// move together from then on. Only one walker per block is simulated, and
/// the active blocks are ordered by start site so that the dynamics never
/// look at label values.
class CoalescingSystem {
public:
    CoalescingSystem(const Kernel& kernel, const std::vector<Site>& starts);

    /// One walker per site, label x at site x.
    static CoalescingSystem from_all_sites(const Kernel& kernel);

    double clock() const noexcept { return clock_; }
    std::size_t labels() const noexcept { return parent_.size(); }
    std::size_t block_count() const noexcept { return block_site_.size(); }

    /// Current site of the walker carrying `label`.
    Site position(std::size_t label) const;

    /// Blocks as sorted label lists, ordered by their smallest label.
    std::vector<std::vector<std::size_t>> partition() const;

    /// Evolves to time t >= clock().
    void run_until(double t, CounterRng& rng);

    /// Evolves until at most `blocks` blocks remain or the clock would pass
    /// `cap`. Returns false (clock = cap) when the cap comes first.
    bool run_until_blocks(std::size_t blocks, CounterRng& rng,
                          double cap = std::numeric_limits<double>::infinity());

private:
    void jump(CounterRng& rng);
    std::size_t find(std::size_t label) const;

    const Kernel* kernel_;
    double clock_ = 0.0;
    std::vector<Site> block_site_;
    std::vector<std::size_t> block_root_;
    std::vector<std::int64_t> occupant_;  // site -> block index, -1 if empty
    mutable std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
    std::vector<std::size_t> root_block_;  // root label -> block index
};

struct MeetingSample {
    double time = 0.0;
    bool censored = false;  // time == cap and the walkers had not met
};

/// M_{x,y} simulated exactly from the pair chain, censored at cap > 0.
MeetingSample meeting_time_sample(const Kernel& kernel, Site x, Site y, CounterRng& rng,
                                  double cap = std::numeric_limits<double>::infinity());

/// h(x, y) = E M_{x,y}: 2h - (q h) - (h q^T) = 1 off the diagonal, h = 0 on
/// it. Dense LU for N <= 20, BiCGSTAB with a matrix-free product beyond.
/// Throws std::length_error for N > 1000 (use gamma_mc instead) and
/// std::runtime_error if the residual exceeds 1e-10.
Matrix meeting_expectations(const Kernel& kernel);

/// gamma = sum pi(x) pi(y) h(x, y)
double gamma_exact(const Kernel& kernel);

struct GammaEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t censored = 0;
};

/// Average of M_{x,y} over (x, y) ~ pi x pi, diagonal starts included.
/// At least 10^3 replicas.
GammaEstimate gamma_mc(const Kernel& kernel, std::size_t replicas, std::uint64_t seed, Parallelism par = {},
                       double cap = std::numeric_limits<double>::infinity());

struct TailProfile {
    std::vector<double> times;
    /// 2 gamma pi_diag P(M_{V,V'} > gamma t)
    std::vector<Estimate> tail;
    /// int_0^t 2 gamma pi_diag P(M_{V,V'} > gamma r) dr
    std::vector<Estimate> integral;
    std::size_t replicas = 0;
    std::size_t censored = 0;
};

/// (V, V') drawn from PairLaw. Meeting times are censored just past
/// gamma * max(times), which does not affect any reported value.
TailProfile meeting_tail_profile(const Kernel& kernel, double gamma, const std::vector<double>& times,
                                 std::size_t replicas, std::uint64_t seed, Parallelism par = {});

struct BlockHitting {
    std::vector<std::size_t> j;
    std::vector<double> times;  // C_j, aligned with j
    std::vector<bool> censored;
};

/// One coalescing run from every site; first time the block count is <= j.
BlockHitting block_hitting_times(const Kernel& kernel, const std::vector<std::size_t>& j_list, CounterRng& rng,
                                 double cap = std::numeric_limits<double>::infinity());

/// Replicated block_hitting_times; replica r uses replica_seed(seed, r).
std::vector<BlockHitting> block_hitting_table(const Kernel& kernel, const std::vector<std::size_t>& j_list,
                                              std::size_t replicas, std::uint64_t seed, Parallelism par = {},
                                              double cap = std::numeric_limits<double>::infinity());

/// Number of Kingman levels K = floor(2 / tol) + 1, so the neglected mean
/// sum_{i > K} 1 / C(i, 2) = 2 / K stays below tol.
std::size_t kingman_levels(double tol);

/// sum_{i=j+1}^{K} Z_i with Z_i ~ Exponential(C(i, 2)).
double kingman_tail_sample(std::size_t j, CounterRng& rng, double tol = 1e-4);

}  // namespace voterlab

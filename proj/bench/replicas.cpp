// Serial reference loop against the OpenMP replica farm on the main
// Monte-Carlo kernels. Arg 1 runs serially, 0 uses every available thread.
#include <benchmark/benchmark.h>

#include "voterlab/coalescent.hpp"
#include "voterlab/graphical.hpp"
#include "voterlab/instances.hpp"
#include "voterlab/voter.hpp"

using namespace voterlab;

namespace {

Parallelism policy(const benchmark::State& state) { return Parallelism{static_cast<int>(state.range(0))}; }

void BM_GammaMc(benchmark::State& state)
{
    const Kernel kernel = build_graph_family(GraphFamily::cycle, 32);
    for (auto _ : state) benchmark::DoNotOptimize(gamma_mc(kernel, 2000, 7, policy(state)).value);
}

void BM_BlockHitting(benchmark::State& state)
{
    const Kernel kernel = build_graph_family(GraphFamily::complete, 200);
    for (auto _ : state)
        benchmark::DoNotOptimize(block_hitting_table(kernel, {1, 2, 5}, 200, 11, policy(state)).size());
}

void BM_DualityGap(benchmark::State& state)
{
    CounterRng rng(3);
    const Kernel kernel = random_kernel(6, rng);
    const MutationMeasure mu = random_mutation(3, 1.0, rng);
    const Configuration xi0 = random_configuration(6, 3, rng);
    const PairTestFunction f = random_pair_function(3, 1.0, true, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(duality_gap_bound(kernel, mu, xi0, 0, 1, f, 2.0, 10000, 5, policy(state)).lhs);
}

void BM_VoterReplicas(benchmark::State& state)
{
    const Kernel kernel = build_graph_family(GraphFamily::complete, 64);
    const std::size_t replicas = 200;
    const std::vector<double> times{31.5};
    for (auto _ : state) {
        std::vector<double> out(replicas);
        for_each_replica(replicas, policy(state), [&](std::size_t r) {
            CounterRng local(replica_seed(9, r));
            Configuration xi = distinct_configuration(64);
            simulate_voter(kernel, MutationMeasure::none(64), xi, times, local,
                           [&](std::size_t, const Configuration& c) { out[r] = static_cast<double>(c[0]); });
        });
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(BM_GammaMc)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BlockHitting)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DualityGap)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_VoterReplicas)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

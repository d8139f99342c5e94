#pragma once

#include <cstddef>
#include <cstdint>

#include <omp.h>

namespace voterlab {

/// Replica execution policy. threads == 1 selects the serial reference loop,
/// threads == 0 lets OpenMP choose, anything else fixes the team size.
struct Parallelism {
    int threads = 0;

    static Parallelism serial() noexcept { return {1}; }
    bool is_serial() const noexcept { return threads == 1; }
};

/// Calls fn(i) for i in [0, n). Replicas must write only to slot i of
/// preallocated output, so the result is independent of scheduling.
template <class Fn>
void for_each_replica_serial(std::size_t n, Fn&& fn)
{
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

template <class Fn>
void for_each_replica(std::size_t n, Parallelism par, Fn&& fn)
{
    if (par.is_serial()) {
        for_each_replica_serial(n, fn);
        return;
    }
    const int team = par.threads > 0 ? par.threads : omp_get_max_threads();
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(team) schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace voterlab

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace voterlab {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based splittable generator.
///
/// A stream is identified by a 64-bit key; the i-th output of the stream is
/// mix64(key + (i + 1) * 0x9e3779b97f4a7c15). Keys are derived from a seed
/// and a stream id by key = mix64(seed ^ mix64(stream + 0x632be59bd9b4e019)),
/// and child streams by the same rule applied to the parent key. Every value
/// depends only on (seed, stream path, counter), so results are identical
/// across platforms, thread counts and call interleavings.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(derive(seed, stream))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    /// Independent child stream; does not advance this generator.
    CounterRng split(std::uint64_t substream) const noexcept { return CounterRng(key_, substream); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_low() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    /// Exponential with the given rate (> 0).
    double exponential(double rate) noexcept;

    /// Uniform integer in [0, n), n > 0 (Lemire's nearly-divisionless method).
    std::uint64_t below(std::uint64_t n) noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Seed of replica r derived from a base seed; replicas never share streams.
constexpr std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) noexcept
{
    return mix64(mix64(seed) ^ mix64(replica + 0x2545f4914f6cdd1dULL));
}

/// Walker/Vose alias table for O(1) sampling from a finite discrete law.
class AliasTable {
public:
    AliasTable() = default;

    /// Weights must be nonnegative with a positive sum.
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const noexcept { return prob_.size(); }

    std::size_t sample(CounterRng& rng) const noexcept
    {
        const std::size_t column = static_cast<std::size_t>(rng.below(prob_.size()));
        return rng.uniform() < prob_[column] ? column : alias_[column];
    }

    /// Exact probability of index i implied by the table (for tests).
    double probability(std::size_t i) const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace voterlab

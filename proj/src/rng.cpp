#include "voterlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace voterlab {

double CounterRng::exponential(double rate) noexcept
{
    // u in (0, 1) exclusive, so every gap is strictly positive and finite.
    const double u = (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    return -std::log(u) / rate;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept
{
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = (*this)();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

AliasTable::AliasTable(std::span<const double> weights)
{
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("alias table: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("alias table: weights must be finite and nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("alias table: weights sum to zero");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for (auto l : large) {
        prob_[l] = 1.0;
        alias_[l] = l;
    }
    const auto heaviest = static_cast<std::uint32_t>(
        std::max_element(weights.begin(), weights.end()) - weights.begin());
    for (auto s : small) {
        prob_[s] = weights[s] > 0.0 ? 1.0 : 0.0;
        alias_[s] = weights[s] > 0.0 ? s : heaviest;
    }
}

double AliasTable::probability(std::size_t i) const
{
    const double n = static_cast<double>(prob_.size());
    double p = prob_.at(i);
    for (std::size_t c = 0; c < prob_.size(); ++c) {
        if (alias_[c] == i && c != i) p += 1.0 - prob_[c];
    }
    return p / n;
}

}  // namespace voterlab

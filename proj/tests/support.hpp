#pragma once

#include <cmath>
#include <vector>

#include "voterlab/kernel.hpp"

namespace voterlab::testing {

inline Kernel complete(std::size_t n) { return build_graph_family(GraphFamily::complete, n); }
inline Kernel cycle(std::size_t n) { return build_graph_family(GraphFamily::cycle, n); }

inline Kernel from_rows(const std::vector<std::vector<double>>& rows)
{
    Matrix q(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) q(i, j) = rows[i][j];
    return Kernel(q);
}

/// |a - b| <= sigmas * se
inline bool within_sigmas(double estimate, double se, double exact, double sigmas)
{
    return std::abs(estimate - exact) <= sigmas * se;
}

}  // namespace voterlab::testing

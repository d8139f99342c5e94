#include "voterlab/instances.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace voterlab {

Kernel random_kernel(std::size_t n, CounterRng& rng, double density)
{
    if (n < 2) throw std::invalid_argument("random_kernel: at least two sites required");
    if (!(density > 0.0) || density > 1.0) throw std::invalid_argument("random_kernel: density must lie in (0, 1]");
    const auto size = static_cast<Eigen::Index>(n);
    Matrix w(size, size);
    for (int attempt = 0;; ++attempt) {
        w.setZero();
        for (Eigen::Index x = 0; x < size; ++x)
            for (Eigen::Index y = 0; y < size; ++y)
                if (x != y && (density == 1.0 || rng.uniform() < density)) w(x, y) = rng.uniform_open_low();
        if (attempt == 99)
            for (Eigen::Index x = 0; x < size; ++x)
                if (w(x, (x + 1) % size) == 0.0) w(x, (x + 1) % size) = rng.uniform_open_low();
        bool rows_ok = true;
        for (Eigen::Index x = 0; x < size; ++x) rows_ok = rows_ok && w.row(x).sum() > 0.0;
        if (rows_ok && is_irreducible(w)) break;
    }
    for (Eigen::Index x = 0; x < size; ++x) w.row(x) /= w.row(x).sum();
    return Kernel(std::move(w));
}

MutationMeasure random_mutation(std::size_t types, double max_total, CounterRng& rng)
{
    std::vector<double> w(types);
    double sum = 0.0;
    for (double& v : w) sum += (v = rng.uniform_open_low());
    const double total = max_total * rng.uniform_open_low();
    for (double& v : w) v *= total / sum;
    return MutationMeasure(std::move(w));
}

Configuration random_configuration(std::size_t sites, std::size_t types, CounterRng& rng)
{
    Configuration xi(sites);
    for (Type& t : xi) t = static_cast<Type>(rng.below(types));
    return xi;
}

FiniteMeasure random_measure(std::size_t types, std::size_t atoms, CounterRng& rng)
{
    if (atoms < 1 || atoms > types) throw std::invalid_argument("random_measure: need 1 <= atoms <= types");
    std::vector<std::size_t> index(types);
    for (std::size_t i = 0; i < types; ++i) index[i] = i;
    for (std::size_t i = 0; i < atoms; ++i) std::swap(index[i], index[i + rng.below(types - i)]);
    std::vector<double> w(types, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) sum += (w[index[i]] = rng.uniform_open_low());
    for (double& v : w) v /= sum;
    return FiniteMeasure(std::move(w));
}

ProductTestFunction random_product_function(std::size_t k, std::size_t types, double scale, CounterRng& rng)
{
    std::vector<std::vector<double>> factors(k, std::vector<double>(types));
    for (auto& f : factors)
        for (double& v : f) v = scale * (2.0 * rng.uniform() - 1.0);
    return ProductTestFunction(std::move(factors));
}

PairTestFunction random_pair_function(std::size_t types, double scale, bool zero_diagonal, CounterRng& rng)
{
    std::vector<std::vector<double>> f(types, std::vector<double>(types));
    for (std::size_t a = 0; a < types; ++a)
        for (std::size_t b = 0; b < types; ++b)
            f[a][b] = (zero_diagonal && a == b) ? 0.0 : scale * (2.0 * rng.uniform() - 1.0);
    return PairTestFunction(std::move(f));
}

TypeSpace random_euclidean_space(std::size_t points, std::size_t dim, CounterRng& rng)
{
    std::vector<std::vector<double>> coords(points, std::vector<double>(dim));
    for (auto& c : coords)
        for (double& v : c) v = rng.uniform();
    std::vector<std::vector<double>> dist(points, std::vector<double>(points, 0.0));
    for (std::size_t a = 0; a < points; ++a)
        for (std::size_t b = a + 1; b < points; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i) s += (coords[a][i] - coords[b][i]) * (coords[a][i] - coords[b][i]);
            // Coincident draws would break positivity; nudge them apart.
            dist[a][b] = dist[b][a] = std::max(std::sqrt(s), 1e-9);
        }
    std::vector<std::string> labels(points);
    for (std::size_t a = 0; a < points; ++a) labels[a] = "p" + std::to_string(a);
    return TypeSpace(std::move(labels), std::move(dist));
}

}  // namespace voterlab

#include "voterlab/typespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voterlab {

TypeSpace::TypeSpace(std::vector<std::string> labels, std::vector<std::vector<double>> dist)
    : labels_(std::move(labels))
{
    const std::size_t m = labels_.size();
    if (m == 0) throw std::invalid_argument("type space: no types");
    if (dist.size() != m) throw std::invalid_argument("type space: distance matrix has wrong number of rows");
    dist_.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        if (dist[i].size() != m) throw std::invalid_argument("type space: distance matrix is not square");
        for (std::size_t j = 0; j < m; ++j) {
            const double d = dist[i][j];
            if (!std::isfinite(d) || d < 0.0) throw std::invalid_argument("type space: distances must be finite and nonnegative");
            dist_[i * m + j] = d;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (dist_[i * m + i] != 0.0) throw std::invalid_argument("type space: nonzero self-distance");
        for (std::size_t j = 0; j < m; ++j) {
            if (dist_[i * m + j] != dist_[j * m + i]) throw std::invalid_argument("type space: distance matrix not symmetric");
            if (i != j && !(dist_[i * m + j] > 0.0)) throw std::invalid_argument("type space: distinct types at distance zero");
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k)
                if (dist_[i * m + k] > dist_[i * m + j] + dist_[j * m + k] + 1e-12)
                    throw std::invalid_argument("type space: triangle inequality violated");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (labels_[i] == labels_[j]) throw std::invalid_argument("type space: duplicate label '" + labels_[i] + "'");
}

TypeSpace TypeSpace::equally_spaced(std::size_t m)
{
    if (m == 0) throw std::invalid_argument("type space: no types");
    std::vector<std::string> labels(m);
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
    const double step = m > 1 ? 1.0 / static_cast<double>(m - 1) : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        labels[i] = std::to_string(i);
        for (std::size_t j = 0; j < m; ++j)
            dist[i][j] = std::abs(static_cast<double>(i) * step - static_cast<double>(j) * step);
    }
    return TypeSpace(std::move(labels), std::move(dist));
}

TypeSpace TypeSpace::discrete(std::size_t m)
{
    if (m == 0) throw std::invalid_argument("type space: no types");
    std::vector<std::string> labels(m);
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 1.0));
    for (std::size_t i = 0; i < m; ++i) {
        labels[i] = std::to_string(i);
        dist[i][i] = 0.0;
    }
    return TypeSpace(std::move(labels), std::move(dist));
}

Type TypeSpace::index_of(const std::string& label) const
{
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::out_of_range("type space: unknown type label '" + label + "'");
    return static_cast<Type>(it - labels_.begin());
}

FiniteMeasure::FiniteMeasure(std::vector<double> w) : weights(std::move(w))
{
    for (double x : weights)
        if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("finite measure: weights must be finite and nonnegative");
}

FiniteMeasure FiniteMeasure::point_mass(std::size_t types, Type at)
{
    if (at >= types) throw std::out_of_range("finite measure: point mass outside the type space");
    std::vector<double> w(types, 0.0);
    w[at] = 1.0;
    return FiniteMeasure(std::move(w));
}

double FiniteMeasure::total() const noexcept
{
    double s = 0.0;
    for (double x : weights) s += x;
    return s;
}

bool FiniteMeasure::is_probability(double tol) const noexcept { return std::abs(total() - 1.0) <= tol; }

MutationMeasure::MutationMeasure(std::vector<double> weights) : weights_(std::move(weights))
{
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("mutation measure: weights must be finite and nonnegative");
        total_ += w;
    }
}

MutationMeasure MutationMeasure::scaled(double c) const
{
    if (!(c >= 0.0)) throw std::invalid_argument("mutation measure: negative scale");
    std::vector<double> w = weights_;
    for (double& x : w) x *= c;
    return MutationMeasure(std::move(w));
}

FiniteMeasure normalize(const MutationMeasure& mu)
{
    std::vector<double> w = mu.weights();
    if (mu.total() > 0.0)
        for (double& x : w) x /= mu.total();
    else
        std::fill(w.begin(), w.end(), 0.0);
    return FiniteMeasure(std::move(w));
}

double mollifier(double r)
{
    if (!(r >= 0.0)) throw std::invalid_argument("mollifier: negative argument");
    return r < 1.0 ? 1.0 - r : 0.0;
}

}  // namespace voterlab

#include "voterlab/generators.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace voterlab {

ProductTestFunction::ProductTestFunction(std::vector<std::vector<double>> factors) : factors_(std::move(factors))
{
    if (factors_.empty()) throw std::invalid_argument("product test function: order must be at least 1");
    if (factors_.size() > kMaxOrder) throw std::invalid_argument("product test function: order above 16");
    const std::size_t m = factors_.front().size();
    if (m == 0) throw std::invalid_argument("product test function: empty type space");
    for (const auto& f : factors_) {
        if (f.size() != m) throw std::invalid_argument("product test function: factors over different type spaces");
        for (double v : f)
            if (!std::isfinite(v)) throw std::invalid_argument("product test function: non-finite value");
    }
}

namespace {

double pairing(std::span<const double> f, const FiniteMeasure& lambda)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * lambda.weights[i];
    return s;
}

void check_types(std::size_t expected, std::size_t got)
{
    if (expected != got) throw std::invalid_argument("dimension mismatch between test function and measure");
}

void check_configuration(const Configuration& xi, std::size_t sites, std::size_t types)
{
    if (xi.size() != sites) throw std::invalid_argument("configuration size does not match the site count");
    for (Type t : xi)
        if (t >= types) throw std::invalid_argument("configuration holds a type outside the type space");
}

}  // namespace

double ProductTestFunction::restricted(std::uint32_t subset, const FiniteMeasure& lambda) const
{
    check_types(types(), lambda.size());
    double p = 1.0;
    for (std::size_t i = 0; i < order(); ++i)
        if (subset & (1u << i)) p *= pairing(factors_[i], lambda);
    return p;
}

double ProductTestFunction::delta(std::uint32_t subset, Type sigma, Type tau) const noexcept
{
    double p = 1.0;
    for (std::size_t i = 0; i < order(); ++i)
        if (subset & (1u << i)) p *= factors_[i][sigma] - factors_[i][tau];
    return p;
}

PairTestFunction::PairTestFunction(std::vector<std::vector<double>> values) : types_(values.size())
{
    if (types_ == 0) throw std::invalid_argument("pair test function: empty type space");
    values_.reserve(types_ * types_);
    for (const auto& row : values) {
        if (row.size() != types_) throw std::invalid_argument("pair test function: matrix is not square");
        for (double v : row) {
            if (!std::isfinite(v)) throw std::invalid_argument("pair test function: non-finite value");
            values_.push_back(v);
        }
    }
}

double PairTestFunction::evaluate(std::span<const double> pi, const Configuration& xi) const
{
    check_configuration(xi, pi.size(), types_);
    double s = 0.0;
    for (std::size_t x = 0; x < xi.size(); ++x)
        for (std::size_t y = 0; y < xi.size(); ++y) s += pi[x] * pi[y] * (*this)(xi[x], xi[y]);
    return s;
}

double phi_eval(const ProductTestFunction& phi, const FiniteMeasure& lambda)
{
    check_types(phi.types(), lambda.size());
    double p = 1.0;
    for (std::size_t i = 0; i < phi.order(); ++i) p *= pairing(phi.factor(i), lambda);
    return p;
}

std::vector<double> mutation_operator(const MutationMeasure& mu, std::span<const double> f)
{
    check_types(mu.size(), f.size());
    double mean = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) mean += mu.weight(static_cast<Type>(s)) * f[s];
    std::vector<double> out(f.size());
    for (std::size_t t = 0; t < f.size(); ++t) out[t] = mean - mu.total() * f[t];
    return out;
}

double voter_generator_phi(const Kernel& kernel, const ProductTestFunction& phi, const Configuration& xi)
{
    check_configuration(xi, kernel.size(), phi.types());
    const auto& pi = kernel.pi();
    const FiniteMeasure m = empirical(xi, pi, phi.types());
    const auto k = static_cast<std::uint32_t>(phi.order());
    const std::uint32_t full = (1u << k) - 1u;
    double total = 0.0;
    for (std::uint32_t subset = 1; subset <= full; ++subset) {
        const int size = std::popcount(subset);
        if (size < 2) continue;
        double inner = 0.0;
        for (Site x = 0; x < kernel.size(); ++x) {
            const double weight = std::pow(pi[x], size);
            for (Site y : kernel.support(x)) inner += weight * kernel(x, y) * phi.delta(subset, xi[y], xi[x]);
        }
        total += phi.restricted(full & ~subset, m) * inner;
    }
    return total;
}

double mutation_generator_phi(const MutationMeasure& mu, std::span<const double> pi, const ProductTestFunction& phi,
                              const Configuration& xi)
{
    check_types(phi.types(), mu.size());
    check_configuration(xi, pi.size(), phi.types());
    const FiniteMeasure m = empirical(xi, pi, phi.types());
    const auto k = static_cast<std::uint32_t>(phi.order());
    const std::uint32_t full = (1u << k) - 1u;
    double total = 0.0;
    for (std::uint32_t subset = 1; subset <= full; ++subset) {
        const int size = std::popcount(subset);
        double inner = 0.0;
        for (std::size_t x = 0; x < xi.size(); ++x) {
            double integral = 0.0;
            for (Type sigma = 0; sigma < mu.size(); ++sigma)
                if (mu.weight(sigma) > 0.0) integral += mu.weight(sigma) * phi.delta(subset, sigma, xi[x]);
            inner += std::pow(pi[x], size) * integral;
        }
        total += phi.restricted(full & ~subset, m) * inner;
    }
    return total;
}

double voter_generator_pair(const Kernel& kernel, const PairTestFunction& f, const Configuration& xi)
{
    check_configuration(xi, kernel.size(), f.types());
    const auto& pi = kernel.pi();
    double diagonal = 0.0;
    double cross = 0.0;
    for (Site x = 0; x < kernel.size(); ++x) {
        const double w = pi[x] * pi[x];
        const Type a = xi[x];
        for (Site y : kernel.support(x)) {
            const Type b = xi[y];
            const double c = w * kernel(x, y);
            diagonal += c * (f(b, b) - f(a, a));
            cross += c * (f(b, a) + f(a, b) - 2.0 * f(a, a));
        }
    }
    return diagonal - cross;
}

double mutation_generator_pair(const MutationMeasure& mu, std::span<const double> pi, const PairTestFunction& f,
                               const Configuration& xi)
{
    check_types(f.types(), mu.size());
    check_configuration(xi, pi.size(), f.types());
    double first = 0.0;
    double second = 0.0;
    for (std::size_t x = 0; x < xi.size(); ++x) {
        const Type a = xi[x];
        const double w = pi[x] * pi[x];
        for (Type s = 0; s < mu.size(); ++s) {
            const double m = mu.weight(s);
            if (m == 0.0) continue;
            first += w * m * (f(s, s) - f(a, a));
            second += w * m * (f(a, s) + f(s, a) - 2.0 * f(a, a));
        }
    }
    double third = 0.0;
    for (std::size_t x = 0; x < xi.size(); ++x)
        for (std::size_t y = 0; y < xi.size(); ++y) {
            const Type a = xi[x];
            const Type b = xi[y];
            double integral = 0.0;
            for (Type s = 0; s < mu.size(); ++s) {
                const double m = mu.weight(s);
                if (m != 0.0) integral += m * (f(a, s) + f(s, b) - 2.0 * f(a, b));
            }
            third += pi[x] * pi[y] * integral;
        }
    return first - second + third;
}

double brute_generator(const Kernel& kernel, const MutationMeasure& mu,
                       const std::function<double(const Configuration&)>& functional, const Configuration& xi)
{
    if (xi.size() != kernel.size()) throw std::invalid_argument("configuration size does not match the site count");
    const double base = functional(xi);
    Configuration neighbor = xi;
    double voting = 0.0;
    for (Site x = 0; x < kernel.size(); ++x) {
        for (Site y = 0; y < kernel.size(); ++y) {
            const double rate = kernel(x, y);
            if (rate == 0.0) continue;
            neighbor[x] = xi[y];
            voting += rate * (functional(neighbor) - base);
        }
        neighbor[x] = xi[x];
    }
    double mutation = 0.0;
    for (Site x = 0; x < kernel.size(); ++x) {
        for (Type s = 0; s < mu.size(); ++s) {
            const double rate = mu.weight(s);
            if (rate == 0.0) continue;
            neighbor[x] = s;
            mutation += rate * (functional(neighbor) - base);
        }
        neighbor[x] = xi[x];
    }
    return voting + mutation;
}

double fleming_viot_generator(const MutationMeasure& mu, const ProductTestFunction& phi, const FiniteMeasure& lambda)
{
    check_types(phi.types(), lambda.size());
    check_types(phi.types(), mu.size());
    const std::size_t k = phi.order();
    const std::size_t m = phi.types();
    std::vector<double> moments(k);
    for (std::size_t i = 0; i < k; ++i) moments[i] = pairing(phi.factor(i), lambda);
    auto product_except = [&](std::size_t a, std::size_t b) {
        double p = 1.0;
        for (std::size_t l = 0; l < k; ++l)
            if (l != a && l != b) p *= moments[l];
        return p;
    };

    double pair_term = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const std::uint32_t subset = (1u << i) | (1u << j);
            double integral = 0.0;
            for (Type s = 0; s < m; ++s)
                for (Type t = 0; t < m; ++t) integral += lambda.weights[s] * lambda.weights[t] * phi.delta(subset, s, t);
            pair_term += integral * product_except(i, j);
        }

    double mutation_term = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto drift = mutation_operator(mu, phi.factor(i));
        mutation_term += pairing(drift, lambda) * product_except(i, i);
    }
    return 0.5 * pair_term + mutation_term;
}

double discordance(const Kernel& kernel, const Configuration& xi)
{
    if (xi.size() != kernel.size()) throw std::invalid_argument("configuration size does not match the site count");
    const auto& pi = kernel.pi();
    double s = 0.0;
    for (Site x = 0; x < kernel.size(); ++x)
        for (Site y : kernel.support(x))
            if (xi[x] != xi[y]) s += pi[x] * pi[x] * kernel(x, y);
    return s;
}

double phi_bound_constant(const ProductTestFunction& phi)
{
    const auto k = static_cast<double>(phi.order());
    double product = 1.0;
    for (std::size_t i = 0; i < phi.order(); ++i) {
        double sup = 0.0;
        for (double v : phi.factor(i)) sup = std::max(sup, std::abs(v));
        product *= std::max(1.0, sup);
    }
    return (std::pow(3.0, k) - 1.0 - 2.0 * k) * product;
}

}  // namespace voterlab

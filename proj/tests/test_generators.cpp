#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/instances.hpp"
#include "voterlab/measures.hpp"

using namespace voterlab;

namespace {

/// Enumerates every single-site update of xi for a functional F.
template <class F>
double enumerate_generator(const Kernel& k, const MutationMeasure& mu, F&& functional, const Configuration& xi)
{
    const double base = functional(xi);
    double total = 0.0;
    for (Site x = 0; x < k.size(); ++x) {
        for (Site y = 0; y < k.size(); ++y) {
            if (k(x, y) == 0.0) continue;
            auto next = xi;
            next[x] = xi[y];
            total += k(x, y) * (functional(next) - base);
        }
        for (Type s = 0; s < mu.size(); ++s) {
            if (mu.weight(s) == 0.0) continue;
            auto next = xi;
            next[x] = s;
            total += mu.weight(s) * (functional(next) - base);
        }
    }
    return total;
}

double product_naive(const ProductTestFunction& phi, const FiniteMeasure& lambda)
{
    double p = 1.0;
    for (std::size_t i = 0; i < phi.order(); ++i) {
        double s = 0.0;
        for (Type a = 0; a < lambda.size(); ++a) s += phi.factor(i)[a] * lambda[a];
        p *= s;
    }
    return p;
}

/// Covariance form of the Fleming-Viot generator on product functions.
double fv_covariance_form(const MutationMeasure& mu, const ProductTestFunction& phi, const FiniteMeasure& lambda)
{
    const std::size_t k = phi.order(), m = phi.types();
    std::vector<double> mom(k);
    for (std::size_t i = 0; i < k; ++i)
        for (Type a = 0; a < m; ++a) mom[i] += phi.factor(i)[a] * lambda[a];
    auto others = [&](std::size_t a, std::size_t b) {
        double p = 1.0;
        for (std::size_t l = 0; l < k; ++l)
            if (l != a && l != b) p *= mom[l];
        return p;
    };
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            double cross = 0.0;
            for (Type a = 0; a < m; ++a) cross += phi.factor(i)[a] * phi.factor(j)[a] * lambda[a];
            total += (cross - mom[i] * mom[j]) * others(i, j);
        }
        double drift = 0.0;
        for (Type a = 0; a < m; ++a)
            for (Type s = 0; s < m; ++s) drift += lambda[a] * mu.weight(s) * (phi.factor(i)[s] - phi.factor(i)[a]);
        total += drift * others(i, i);
    }
    return total;
}

bool close(double a, double b, double rel = 1e-10, double abs_floor = 1e-13)
{
    return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

}  // namespace

TEST_SUITE("generators")
{
    TEST_CASE("phi evaluation")
    {
        ProductTestFunction one({{1.0, 1.0}});
        CHECK(phi_eval(one, FiniteMeasure({0.3, 0.7})) == doctest::Approx(1.0));
        ProductTestFunction ind({{1.0, 0.0}, {1.0, 0.0}});
        CHECK(phi_eval(ind, FiniteMeasure({0.3, 0.7})) == doctest::Approx(0.09));
        CHECK_THROWS_AS(phi_eval(ind, FiniteMeasure({0.3, 0.3, 0.4})), std::invalid_argument);

        CounterRng rng(31);
        for (int i = 0; i < 100; ++i) {
            const std::size_t m = 2 + rng.below(5);
            const auto phi = random_product_function(1 + rng.below(4), m, 2.0, rng);
            const auto lambda = random_measure(m, 1 + rng.below(m), rng);
            CHECK(std::abs(phi_eval(phi, lambda) - product_naive(phi, lambda)) <= 1e-12);
        }
    }

    TEST_CASE("mutation operator")
    {
        const MutationMeasure mu({0.0, 1.0, 0.0});
        const std::vector<double> f{1.0, 4.0, -2.0};
        const auto a = mutation_operator(mu, f);
        CHECK(a == std::vector<double>{3.0, 0.0, 6.0});
        for (double v : mutation_operator(MutationMeasure({0.2, 0.5, 0.3}), std::vector<double>{2.0, 2.0, 2.0})) CHECK(v == doctest::Approx(0.0));
        const MutationMeasure nu({0.2, 0.5, 0.3});
        const auto base = mutation_operator(nu, f);
        const auto scaled = mutation_operator(nu.scaled(3.0), f);
        for (std::size_t i = 0; i < 3; ++i) CHECK(scaled[i] == doctest::Approx(3.0 * base[i]));
    }

    TEST_CASE("voter generator on product functions vanishes at order one and at consensus")
    {
        CounterRng rng(32);
        for (int i = 0; i < 50; ++i) {
            const auto k = random_kernel(2 + rng.below(5), rng);
            const std::size_t m = 2 + rng.below(3);
            const auto xi = random_configuration(k.size(), m, rng);
            CHECK(std::abs(voter_generator_phi(k, random_product_function(1, m, 1.0, rng), xi)) <= 1e-15);
            const Configuration mono(k.size(), static_cast<Type>(rng.below(m)));
            CHECK(voter_generator_phi(k, random_product_function(3, m, 1.0, rng), mono) == 0.0);
            CHECK(voter_generator_pair(k, random_pair_function(m, 1.0, false, rng), mono) == 0.0);
        }
    }

    TEST_CASE("mutation generator special cases")
    {
        CounterRng rng(33);
        const auto k = random_kernel(5, rng);
        const auto xi = random_configuration(5, 3, rng);
        const auto phi1 = random_product_function(1, 3, 1.0, rng);
        CHECK(mutation_generator_phi(MutationMeasure::none(3), k.pi(), phi1, xi) == 0.0);
        const MutationMeasure mu({0.3, 0.0, 0.9});
        const auto drift = mutation_operator(mu, phi1.factor(0));
        const auto m = empirical(xi, k.pi(), 3);
        double expected = 0.0;
        for (Type a = 0; a < 3; ++a) expected += drift[a] * m[a];
        CHECK(mutation_generator_phi(mu, k.pi(), phi1, xi) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(mutation_generator_pair(MutationMeasure::none(3), k.pi(), random_pair_function(3, 1.0, false, rng), xi) == 0.0);
        const auto zero = PairTestFunction(std::vector<std::vector<double>>(3, std::vector<double>(3, 0.0)));
        CHECK(voter_generator_pair(k, zero, xi) == 0.0);
    }

    TEST_CASE("closed forms match enumeration on random instances")
    {
        CounterRng rng(34);
        for (int i = 0; i < 300; ++i) {
            const auto k = random_kernel(2 + rng.below(5), rng, 0.7);
            const std::size_t m = 1 + rng.below(4);
            const auto mu = rng.below(4) == 0 ? MutationMeasure::none(m) : random_mutation(m, 2.0, rng);
            const auto xi = random_configuration(k.size(), m, rng);
            const auto phi = random_product_function(1 + rng.below(3), m, 1.5, rng);
            const auto pi = k.pi();

            const double vm_phi = voter_generator_phi(k, phi, xi);
            const double mu_phi = mutation_generator_phi(mu, pi, phi, xi);
            auto phi_of = [&](const Configuration& c) { return product_naive(phi, empirical(c, pi, m)); };
            const double brute_vm_phi = enumerate_generator(k, MutationMeasure::none(m), phi_of, xi);
            const double brute_all_phi = enumerate_generator(k, mu, phi_of, xi);
            CHECK(close(vm_phi, brute_vm_phi));
            CHECK(close(vm_phi + mu_phi, brute_all_phi));
            CHECK(close(brute_all_phi, brute_generator(k, mu, phi_of, xi)));

            const auto f = random_pair_function(m, 1.5, rng.below(2) == 0, rng);
            auto pair_of = [&](const Configuration& c) { return f.evaluate(pi, c); };
            CHECK(close(voter_generator_pair(k, f, xi), enumerate_generator(k, MutationMeasure::none(m), pair_of, xi)));
            CHECK(close(voter_generator_pair(k, f, xi) + mutation_generator_pair(mu, pi, f, xi),
                        enumerate_generator(k, mu, pair_of, xi)));
        }
    }

    TEST_CASE("voter generator bound by the discordance")
    {
        CounterRng rng(35);
        for (int i = 0; i < 300; ++i) {
            const auto k = random_kernel(2 + rng.below(6), rng, 0.6);
            const std::size_t m = 2 + rng.below(3);
            const auto xi = random_configuration(k.size(), m, rng);
            const auto phi = random_product_function(1 + rng.below(4), m, 2.0, rng);
            CHECK(std::abs(voter_generator_phi(k, phi, xi)) <= phi_bound_constant(phi) * discordance(k, xi) + 1e-14);
        }
        CHECK(discordance(voterlab::testing::complete(4), {1, 1, 1, 1}) == 0.0);
        CHECK(discordance(voterlab::testing::complete(2), {0, 1}) == doctest::Approx(0.5));
    }

    TEST_CASE("Fleming-Viot generator")
    {
        CounterRng rng(36);
        const auto none = MutationMeasure::none(3);
        CHECK(fleming_viot_generator(none, random_product_function(1, 3, 1.0, rng), random_measure(3, 3, rng)) == 0.0);
        CHECK(fleming_viot_generator(none, random_product_function(3, 3, 1.0, rng), FiniteMeasure::point_mass(3, 1)) == 0.0);
        for (double p : {0.1, 0.5, 0.8}) {
            ProductTestFunction ind({{1.0, 0.0}, {1.0, 0.0}});
            CHECK(fleming_viot_generator(MutationMeasure::none(2), ind, FiniteMeasure({p, 1.0 - p})) == doctest::Approx(p - p * p));
        }
        for (int i = 0; i < 200; ++i) {
            const std::size_t m = 1 + rng.below(5);
            const auto mu = random_mutation(m, 2.0, rng);
            const auto phi = random_product_function(1 + rng.below(4), m, 1.5, rng);
            const auto lambda = random_measure(m, 1 + rng.below(m), rng);
            CHECK(close(fleming_viot_generator(mu, phi, lambda), fv_covariance_form(mu, phi, lambda), 1e-10, 1e-14));
        }
    }

    TEST_CASE("test function validation")
    {
        CHECK_THROWS_AS(ProductTestFunction({}), std::invalid_argument);
        CHECK_THROWS_AS(ProductTestFunction({{1.0, 2.0}, {1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(PairTestFunction({{1.0, 2.0}}), std::invalid_argument);
        const auto k = voterlab::testing::complete(3);
        ProductTestFunction phi({{1.0, 2.0}});
        CHECK_THROWS_AS(voter_generator_phi(k, phi, {0, 1}), std::invalid_argument);
        CHECK_THROWS_AS(voter_generator_phi(k, phi, {0, 1, 2}), std::invalid_argument);
    }
}

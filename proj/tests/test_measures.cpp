#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "voterlab/instances.hpp"
#include "voterlab/measures.hpp"

using namespace voterlab;

namespace {

/// Grid search over eps in (0, 1] used as an independent check of the exact
/// breakpoint evaluation.
double discrepancy_on_grid(const FiniteMeasure& a, const FiniteMeasure& b, const TypeSpace& space)
{
    double best = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double eps = i / 1000.0;
        best = std::max(best, std::abs(mollified_self_mass(a, space, eps) - mollified_self_mass(b, space, eps)));
    }
    return best;
}

}  // namespace

TEST_SUITE("measures")
{
    TEST_CASE("empirical measure")
    {
        const std::vector<double> uniform(4, 0.25);
        CHECK(empirical({2, 2, 2, 2}, uniform, 3).weights == std::vector<double>{0.0, 0.0, 1.0});
        const auto distinct = empirical({0, 1, 2, 3}, uniform, 4);
        for (double w : distinct.weights) CHECK(w == doctest::Approx(0.25));
        const auto m = empirical({0, 0, 1}, std::vector<double>{0.5, 0.25, 0.25}, 2);
        CHECK(m[0] == doctest::Approx(0.75));
        CHECK(m[1] == doctest::Approx(0.25));
        CHECK_THROWS_AS(empirical({0, 3}, std::vector<double>{0.5, 0.5}, 3), std::invalid_argument);
    }

    TEST_CASE("atoms, entropy, diversity, star")
    {
        const FiniteMeasure abc({0.2, 0.5, 0.3});
        CHECK(atoms_desc(abc) == std::vector<double>{0.5, 0.3, 0.2});
        CHECK(atoms_desc(FiniteMeasure::point_mass(3, 1)) == std::vector<double>{1.0});
        CHECK(atoms_desc(FiniteMeasure::zero(3)).empty());
        CHECK(atom_count(abc) == 3);

        CHECK(entropy(FiniteMeasure::point_mass(4, 2)) == 0.0);
        CHECK(entropy(FiniteMeasure({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(std::log(4.0)));
        CHECK(entropy(FiniteMeasure({0.5, 0.3, 0.2})) == doctest::Approx(1.02965).epsilon(1e-5));

        CHECK(diversity(FiniteMeasure::point_mass(4, 0)) == 1.0);
        CHECK(diversity(FiniteMeasure({0.2, 0.2, 0.2, 0.2, 0.2})) == doctest::Approx(0.2));
        CHECK(diversity(FiniteMeasure({0.5, 0.3, 0.2})) == doctest::Approx(0.38));

        CHECK(star(FiniteMeasure::point_mass(2, 1)).weights == std::vector<double>{0.0, 1.0});
        CHECK(star(FiniteMeasure({0.25, 0.25, 0.25, 0.25})).total() == doctest::Approx(0.25));
    }

    TEST_CASE("atomic discrepancy")
    {
        TypeSpace far({"a", "b"}, {{0, 2}, {2, 0}});
        const auto a = FiniteMeasure::point_mass(2, 0);
        const auto b = FiniteMeasure::point_mass(2, 1);
        const FiniteMeasure half({0.5, 0.5});
        CHECK(atomic_discrepancy(a, a, far) == 0.0);
        CHECK(atomic_discrepancy(a, b, far) == 0.0);
        CHECK(atomic_discrepancy(a, half, far) == doctest::Approx(0.5));
        CHECK(discrepancy_on_grid(a, half, far) == doctest::Approx(0.5));
    }

    TEST_CASE("atomic discrepancy against a fine grid and its small-eps limit")
    {
        CounterRng rng(21);
        for (int i = 0; i < 50; ++i) {
            const auto space = random_euclidean_space(6, 1, rng);
            const auto l = random_measure(6, 1 + rng.below(6), rng);
            const auto n = random_measure(6, 1 + rng.below(6), rng);
            const double exact = atomic_discrepancy(l, n, space);
            CHECK(exact >= discrepancy_on_grid(l, n, space) - 1e-12);
            CHECK(exact >= std::abs(star(l).total() - star(n).total()) - 1e-15);
            CHECK(exact == atomic_discrepancy(n, l, space));
        }
    }

    TEST_CASE("Prohorov distance")
    {
        for (double d : {0.3, 1.0, 2.5}) {
            TypeSpace space({"a", "b"}, {{0, d}, {d, 0}});
            const auto a = FiniteMeasure::point_mass(2, 0);
            const auto b = FiniteMeasure::point_mass(2, 1);
            CHECK(prohorov(a, b, space) == doctest::Approx(std::min(d, 1.0)));
            CHECK(prohorov(a, a, space) == 0.0);
            CHECK(prohorov_by_subsets(a, b, space) == doctest::Approx(std::min(d, 1.0)));
        }
    }

    TEST_CASE("Prohorov flow and subset routes agree and are symmetric")
    {
        CounterRng rng(22);
        for (int i = 0; i < 200; ++i) {
            const auto space = random_euclidean_space(8, 2, rng);
            const auto l = random_measure(8, 1 + rng.below(8), rng);
            const auto n = random_measure(8, 1 + rng.below(8), rng);
            const double flow = prohorov(l, n, space);
            CHECK(std::abs(flow - prohorov_by_subsets(l, n, space)) <= 1e-12);
            CHECK(std::abs(flow - prohorov(n, l, space)) <= 1e-12);
            CHECK(flow >= 0.0);
            CHECK(flow <= 1.0);
        }
    }

    TEST_CASE("subset route refuses large supports")
    {
        const auto space = TypeSpace::equally_spaced(30);
        const FiniteMeasure u(std::vector<double>(30, 1.0 / 30.0));
        CHECK_THROWS_AS(prohorov_by_subsets(u, u, space), std::length_error);
        CHECK(prohorov(u, u, space) == 0.0);
    }

    TEST_CASE("rho_a metric axioms on random triples")
    {
        CounterRng rng(23);
        for (int i = 0; i < 300; ++i) {
            const auto space = random_euclidean_space(7, 2, rng);
            const auto a = random_measure(7, 1 + rng.below(7), rng);
            const auto b = random_measure(7, 1 + rng.below(7), rng);
            const auto c = random_measure(7, 1 + rng.below(7), rng);
            CHECK(rho_a(a, a, space) == 0.0);
            CHECK(rho_a(a, b, space) == rho_a(b, a, space));
            CHECK(rho_a(a, c, space) <= rho_a(a, b, space) + rho_a(b, c, space) + 1e-9);
        }
    }

    TEST_CASE("colliding atoms keep the atomic term")
    {
        for (int m : {2, 4, 16, 256}) {
            const double d = 1.0 / m;
            TypeSpace space({"a", "b"}, {{0, d}, {d, 0}});
            const FiniteMeasure lambda({0.5, 0.5});
            const auto nu = FiniteMeasure::point_mass(2, 0);
            CHECK(prohorov(lambda, nu, space) == doctest::Approx(std::min(d, 0.5)));
            CHECK(atomic_discrepancy(lambda, nu, space) == doctest::Approx(0.5));
            CHECK(rho_a(lambda, nu, space) == doctest::Approx(std::min(d, 0.5) + 0.5));
        }
    }

    TEST_CASE("rho_a convergence tracks Prohorov plus atom mass")
    {
        // Atoms of mass 1/2 at a and at b_m with b_m -> b: converges in both senses.
        for (int m : {4, 64, 1024}) {
            const double d = 1.0 / m;
            TypeSpace space({"a", "b", "bm"}, {{0, 1, 1 + d}, {1, 0, d}, {1 + d, d, 0}});
            const FiniteMeasure lambda({0.5, 0.0, 0.5});
            const FiniteMeasure limit({0.5, 0.5, 0.0});
            CHECK(rho_a(lambda, limit, space) <= 2.0 * d + 1e-12);
        }
    }
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "voterlab/coalescent.hpp"
#include "voterlab/instances.hpp"
#include "voterlab/kernel.hpp"

using namespace voterlab;
using voterlab::testing::complete;
using voterlab::testing::cycle;
using voterlab::testing::from_rows;

namespace {

double stationary_residual(const Kernel& k)
{
    const auto& pi = k.pi();
    double res = 0.0;
    for (std::size_t y = 0; y < k.size(); ++y) {
        double s = 0.0;
        for (std::size_t x = 0; x < k.size(); ++x) s += pi[x] * k(static_cast<Site>(x), static_cast<Site>(y));
        res += std::abs(s - pi[y]);
    }
    return res;
}

double complete_diagonal(std::size_t n, double t)
{
    const double nn = static_cast<double>(n);
    return 1.0 / nn + (1.0 - 1.0 / nn) * std::exp(-t * nn / (nn - 1.0));
}

}  // namespace

TEST_SUITE("kernel")
{
    TEST_CASE("stationary laws")
    {
        for (double p : stationary(complete(3).matrix())) CHECK(p == doctest::Approx(1.0 / 3.0));
        for (double p : stationary(from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}).matrix())) CHECK(p == doctest::Approx(1.0 / 3.0));
        for (double p : stationary(from_rows({{0, 1}, {1, 0}}).matrix())) CHECK(p == doctest::Approx(0.5));
        const auto k = from_rows({{0, 1, 0}, {0.5, 0, 0.5}, {0, 1, 0}});
        CHECK(k.pi()[0] == doctest::Approx(0.25));
        CHECK(k.pi()[1] == doctest::Approx(0.5));
    }

    TEST_CASE("reducible and malformed kernels are rejected")
    {
        Matrix q = Matrix::Zero(4, 4);
        q(0, 1) = q(1, 0) = q(2, 3) = q(3, 2) = 1.0;
        CHECK_FALSE(is_irreducible(q));
        CHECK_THROWS_WITH_AS(Kernel{q}, "kernel not irreducible", std::invalid_argument);
        CHECK_THROWS_AS(from_rows({{0.5, 0.5}, {1, 0}}), std::invalid_argument);
        CHECK_THROWS_AS(from_rows({{0, 0.9}, {1, 0}}), std::invalid_argument);
    }

    TEST_CASE("stationary residual on random kernels")
    {
        CounterRng rng(17);
        for (int i = 0; i < 20; ++i) {
            const auto k = random_kernel(2 + rng.below(30), rng, 0.3);
            CHECK(stationary_residual(k) <= 1e-10);
        }
    }

    TEST_CASE("stationary law by power iteration above 2000 sites")
    {
        GraphParams params;
        params.edge_probability = 0.004;
        params.seed = 3;
        const auto k = build_graph_family(GraphFamily::weighted_er, 2100, params);
        CHECK(stationary_residual(k) <= 1e-10);
    }

    TEST_CASE("semigroup at zero is the identity")
    {
        CounterRng rng(5);
        const auto k = random_kernel(6, rng);
        CHECK(semigroup(k, 0.0).isApprox(Matrix::Identity(6, 6), 0.0));
        CHECK_THROWS_AS(semigroup(k, -1.0), std::invalid_argument);
    }

    TEST_CASE("semigroup diagonal on complete graphs")
    {
        for (std::size_t n : {2, 3, 5}) {
            const auto k = complete(n);
            for (double t : {0.1, 0.7, 3.0, 12.0, 40.0}) {
                const auto qt = semigroup(k, t);
                for (std::size_t x = 0; x < n; ++x) CHECK(std::abs(qt(x, x) - complete_diagonal(n, t)) < 1e-10);
            }
        }
    }

    TEST_CASE("semigroup property and stochastic rows")
    {
        CounterRng rng(6);
        for (int i = 0; i < 10; ++i) {
            const auto k = random_kernel(2 + rng.below(7), rng, 0.5);
            const double s = 10.0 * rng.uniform(), t = 10.0 * rng.uniform();
            const Matrix lhs = semigroup(k, s) * semigroup(k, t);
            const Matrix rhs = semigroup(k, s + t);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
            for (Eigen::Index r = 0; r < rhs.rows(); ++r) CHECK(std::abs(rhs.row(r).sum() - 1.0) < 1e-12);
            CHECK(rhs.minCoeff() >= 0.0);
        }
    }

    TEST_CASE("semigroup converges to the stationary law")
    {
        for (const auto& k : {complete(4), cycle(7), from_rows({{0, 0.3, 0.7}, {0.5, 0, 0.5}, {0.9, 0.1, 0}})}) {
            const double gap = k.is_reversible() ? spectral_gap(k).conventional : 0.5;
            CHECK(tv_distance_max(k, 50.0 / gap) <= 1e-8);
        }
    }

    TEST_CASE("total variation distance")
    {
        for (std::size_t n : {2, 5, 9}) CHECK(tv_distance_max(complete(n), 0.0) == doctest::Approx(1.0 - 1.0 / n));
        for (double t : {0.2, 1.0, 2.5}) CHECK(tv_distance_max(complete(2), t) == doctest::Approx(0.5 * std::exp(-2.0 * t)).epsilon(1e-10));

        CounterRng rng(8);
        const auto k = random_kernel(6, rng, 0.4);
        const double tmix = mixing_time(k);
        double previous = 1.0;
        for (double t = 0.0; t < 6.0 * tmix; t += tmix / 7.0) {
            const double d = tv_distance_max(k, t);
            CHECK(d <= previous + 1e-12);
            previous = d;
            if (t >= tmix) CHECK(d <= std::exp(-std::floor(t / tmix)) + 1e-9);
        }
    }

    TEST_CASE("mixing times")
    {
        CHECK(mixing_time(complete(2)) == doctest::Approx(0.5).epsilon(1e-5));
        for (std::size_t n : {3, 10}) {
            const double nn = static_cast<double>(n);
            const double exact = (nn - 1.0) / nn * std::log(2.0 * std::exp(1.0) * (1.0 - 1.0 / nn));
            CHECK(std::abs(mixing_time(complete(n)) - exact) < 1e-5);
        }
        const double ratio = mixing_time(cycle(16)) / mixing_time(cycle(8));
        CHECK(ratio >= 3.0);
        CHECK(ratio <= 5.0);
    }

    TEST_CASE("spectral gaps")
    {
        CHECK(spectral_gap(complete(2)).conventional == doctest::Approx(2.0));
        for (std::size_t n : {3, 6, 11}) {
            const auto gap = spectral_gap(complete(n));
            CHECK(gap.conventional == doctest::Approx(static_cast<double>(n) / (n - 1.0)));
            CHECK(gap.literal == doctest::Approx(gap.conventional / n));
        }
        const double two_pi = 2.0 * std::acos(-1.0);
        for (std::size_t n : {5, 8, 20}) CHECK(spectral_gap(cycle(n)).conventional == doctest::Approx(1.0 - std::cos(two_pi / n)));
        CHECK_THROWS_WITH_AS(spectral_gap(from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}})), "spectral gap requires reversibility",
                             std::invalid_argument);
    }

    TEST_CASE("pair law exact probabilities")
    {
        PairLaw k3(complete(3));
        REQUIRE(k3.pairs().size() == 6);
        for (double p : k3.probabilities()) CHECK(p == doctest::Approx(1.0 / 6.0));
        CHECK(k3.pi_diag() == doctest::Approx(1.0 / 3.0));
        CHECK(k3.normalizer() == doctest::Approx(1.0 / 3.0));
        PairLaw two(from_rows({{0, 1}, {1, 0}}));
        REQUIRE(two.pairs().size() == 2);
        for (double p : two.probabilities()) CHECK(p == doctest::Approx(0.5));
    }

    TEST_CASE("pair law sampling frequencies")
    {
        CounterRng rng(10);
        const auto k = random_kernel(5, rng);
        PairLaw law(k);
        // Exact law by enumeration.
        double z = 0.0;
        for (Site x = 0; x < 5; ++x)
            for (Site y = 0; y < 5; ++y) z += k.pi()[x] * k.pi()[x] * k(x, y);
        std::vector<std::vector<double>> counts(5, std::vector<double>(5, 0.0));
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            const auto [x, y] = law.sample(rng);
            counts[x][y] += 1.0;
        }
        for (Site x = 0; x < 5; ++x)
            for (Site y = 0; y < 5; ++y) {
                const double p = k.pi()[x] * k.pi()[x] * k(x, y) / z;
                CHECK(std::abs(counts[x][y] / n - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n) + 1e-15);
            }
    }

    TEST_CASE("graph families")
    {
        const auto k4 = complete(4);
        for (Site x = 0; x < 4; ++x)
            for (Site y = 0; y < 4; ++y) CHECK(k4(x, y) == doctest::Approx(x == y ? 0.0 : 1.0 / 3.0));
        const auto c5 = cycle(5);
        for (Site x = 0; x < 5; ++x) {
            CHECK(c5(x, (x + 1) % 5) == doctest::Approx(0.5));
            CHECK(c5(x, (x + 4) % 5) == doctest::Approx(0.5));
        }
        const auto t16 = build_graph_family(GraphFamily::torus2d, 16);
        for (Site x = 0; x < 16; ++x) CHECK(t16.support(x).size() == 4);
        CHECK_THROWS_AS(build_graph_family(GraphFamily::torus2d, 15), std::invalid_argument);

        GraphParams params;
        params.edge_probability = 0.3;
        params.seed = 7;
        const auto er = build_graph_family(GraphFamily::weighted_er, 20, params);
        CHECK(is_irreducible(er.matrix()));
        for (Site x = 0; x < 20; ++x) {
            CHECK(er(x, x) == 0.0);
            CHECK(er.matrix().row(x).sum() == doctest::Approx(1.0));
        }
        CHECK(er.is_reversible(1e-10));
        CHECK(parse_graph_family("torus2d") == GraphFamily::torus2d);
        CHECK(to_string(GraphFamily::weighted_er) == "weighted_er");
        CHECK_THROWS_AS(parse_graph_family("star"), std::invalid_argument);
    }

    TEST_CASE("mixing report diagnostics")
    {
        double previous = INFINITY;
        for (std::size_t n : {8, 16, 32, 64}) {
            const double nn = static_cast<double>(n);
            const auto report = mixing_report(complete(n), (nn - 1.0) * (nn - 1.0) / (2.0 * nn));
            CHECK(report.pi_diag == doctest::Approx(1.0 / nn));
            CHECK(report.mixing_ratio < previous);
            REQUIRE(report.gap.has_value());
            CHECK(std::isfinite(report.gap_ratio));
            previous = report.mixing_ratio;
        }
        CHECK(previous < 0.1);

        std::vector<double> ratios;
        for (std::size_t n : {8, 16, 32}) {
            const auto k = cycle(n);
            ratios.push_back(mixing_report(k, gamma_exact(k)).mixing_ratio);
        }
        CHECK(ratios.back() >= 0.5 * ratios.front());

        const auto directed = from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
        const auto report = mixing_report(directed, 1.0);
        CHECK_FALSE(report.gap.has_value());
        CHECK(std::isnan(report.gap_ratio));
    }
}

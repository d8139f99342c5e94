#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "support.hpp"
#include "voterlab/graphical.hpp"
#include "voterlab/instances.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/voter.hpp"

using namespace voterlab;
using voterlab::testing::complete;

namespace {

EventLog empty_log(std::size_t sites, double horizon)
{
    EventLog log;
    log.horizon = horizon;
    log.arrows.resize(sites);
    log.mutations.resize(sites);
    return log;
}

bool same_log(const EventLog& a, const EventLog& b)
{
    if (a.horizon != b.horizon || a.seed != b.seed || a.sites() != b.sites()) return false;
    for (std::size_t x = 0; x < a.sites(); ++x) {
        if (a.arrows[x].size() != b.arrows[x].size() || a.mutations[x].size() != b.mutations[x].size()) return false;
        for (std::size_t i = 0; i < a.arrows[x].size(); ++i)
            if (a.arrows[x][i].time != b.arrows[x][i].time || a.arrows[x][i].target != b.arrows[x][i].target) return false;
        for (std::size_t i = 0; i < a.mutations[x].size(); ++i)
            if (a.mutations[x][i].time != b.mutations[x][i].time || a.mutations[x][i].type != b.mutations[x][i].type) return false;
    }
    return true;
}

PairTestFunction discrete_indicator(std::size_t types)
{
    std::vector<std::vector<double>> f(types, std::vector<double>(types, 1.0));
    for (std::size_t a = 0; a < types; ++a) f[a][a] = 0.0;
    return PairTestFunction(f);
}

}  // namespace

TEST_SUITE("graphical")
{
    TEST_CASE("log generation")
    {
        CounterRng rng(41);
        const auto k = random_kernel(5, rng);
        const auto log = generate_log(k, MutationMeasure::none(3), 4.0, 99);
        for (const auto& marks : log.mutations) CHECK(marks.empty());
        for (std::size_t x = 0; x < log.sites(); ++x) {
            for (std::size_t i = 0; i < log.arrows[x].size(); ++i) {
                const auto& a = log.arrows[x][i];
                CHECK(a.time > 0.0);
                CHECK(a.time <= 4.0);
                CHECK(k(static_cast<Site>(x), a.target) > 0.0);
                if (i > 0) CHECK(a.time > log.arrows[x][i - 1].time);
            }
        }
        CHECK(same_log(log, generate_log(k, MutationMeasure::none(3), 4.0, 99)));
        CHECK_FALSE(same_log(log, generate_log(k, MutationMeasure::none(3), 4.0, 100)));
        CHECK_THROWS_AS(generate_log(k, MutationMeasure::none(3), 1e9, 1), std::length_error);
        CHECK_THROWS_AS(generate_log(k, MutationMeasure::none(3), 0.0, 1), std::invalid_argument);
    }

    TEST_CASE("arrow counts are Poisson with mean T")
    {
        const auto k = complete(3);
        const MutationMeasure mu({0.25, 0.25});
        const int replicas = 10000;
        double sum = 0.0, marks = 0.0;
        for (int r = 0; r < replicas; ++r) {
            const auto log = generate_log(k, mu, 10.0, replica_seed(5, r));
            sum += static_cast<double>(log.arrows[0].size());
            marks += static_cast<double>(log.mutations[1].size());
        }
        const double sigma = std::sqrt(10.0 / replicas);
        CHECK(std::abs(sum / replicas - 10.0) <= 5.0 * sigma);
        CHECK(std::abs(marks / replicas - 5.0) <= 5.0 * std::sqrt(5.0 / replicas));
    }

    TEST_CASE("forward voter on hand-built logs")
    {
        auto log = empty_log(3, 2.0);
        const Configuration xi0{0, 1, 2};
        CHECK(forward_voter(log, xi0, 2.0) == xi0);

        log.arrows[0].push_back({0.5, 2});
        CHECK(forward_voter(log, xi0, 1.0) == Configuration{2, 1, 2});
        CHECK(forward_voter(log, xi0, 0.4) == xi0);

        log.mutations[1].push_back({1.5, 7});
        CHECK(forward_voter(log, xi0, 2.0) == Configuration{2, 7, 2});
        CHECK_THROWS_AS(forward_voter(log, xi0, 2.5), std::invalid_argument);
        CHECK_THROWS_AS(forward_voter(log, {0, 1}, 1.0), std::invalid_argument);
    }

    TEST_CASE("simultaneous events follow the (time, site, kind) order")
    {
        auto log = empty_log(2, 1.0);
        log.arrows[0].push_back({0.5, 1});
        log.arrows[1].push_back({0.5, 0});
        const Configuration xi0{3, 4};
        CHECK(forward_voter(log, xi0, 1.0) == Configuration{4, 4});
        CHECK(duality_check(log, xi0, 1.0));

        auto same_site = empty_log(2, 1.0);
        same_site.arrows[0].push_back({0.5, 1});
        same_site.mutations[0].push_back({0.5, 9});
        CHECK(forward_voter(same_site, xi0, 1.0) == Configuration{9, 4});
        CHECK(duality_check(same_site, xi0, 1.0));
        const auto path = backward_dual(same_site, 0, 1.0);
        CHECK(path.first_mutation == doctest::Approx(0.5));
        CHECK(*path.mutant == 9);
    }

    TEST_CASE("backward dual on hand-built logs")
    {
        auto log = empty_log(3, 3.0);
        const auto still = backward_dual(log, 1, 2.0);
        CHECK(still.jumps.empty());
        CHECK(still.end() == 1);
        CHECK(std::isinf(still.first_mutation));
        CHECK_FALSE(still.mutant.has_value());

        log.mutations[1].push_back({0.5, 4});
        const auto marked = backward_dual(log, 1, 2.0);
        CHECK(marked.first_mutation == doctest::Approx(1.5));
        CHECK(*marked.mutant == 4);

        log.arrows[0].push_back({1.0, 1});
        log.arrows[1].push_back({0.8, 2});
        const auto p = backward_dual(log, 0, 2.0);
        REQUIRE(p.jumps.size() == 2);
        CHECK(p.jumps[0].first == doctest::Approx(1.0));
        CHECK(p.jumps[0].second == 1);
        CHECK(p.jumps[1].second == 2);
        CHECK(p.position(0.0) == 0);
        CHECK(p.position(1.1) == 1);
        CHECK(p.position(2.0) == 2);
        CHECK(std::isinf(p.first_mutation));
        CHECK_THROWS_AS(backward_dual(log, 0, 3.5), std::invalid_argument);
        CHECK_THROWS_AS(backward_dual(log, 5, 1.0), std::out_of_range);
    }

    TEST_CASE("pathwise duality on random instances")
    {
        CounterRng rng(42);
        for (int i = 0; i < 500; ++i) {
            const auto k = random_kernel(2 + rng.below(7), rng, 0.5);
            const std::size_t m = 1 + rng.below(4);
            const auto mu = rng.below(4) == 0 ? MutationMeasure::none(m) : random_mutation(m, 1.0, rng);
            const double t = 5.0 * rng.uniform_open_low();
            const auto log = generate_log(k, mu, t, rng());
            const auto xi0 = random_configuration(k.size(), m, rng);
            REQUIRE(duality_check(log, xi0, t));
            if (mu.is_zero()) {
                const auto xi = forward_voter(log, xi0, t);
                const std::set<Type> before(xi0.begin(), xi0.end());
                for (Site x = 0; x < k.size(); ++x) {
                    CHECK(xi[x] == xi0[backward_dual(log, x, t).end()]);
                    CHECK(before.count(xi[x]) == 1);
                }
            }
        }
    }

    TEST_CASE("consensus with a single mutant type stays two-valued")
    {
        CounterRng rng(43);
        const auto k = random_kernel(6, rng);
        const MutationMeasure mu({0.0, 0.0, 0.7});
        const Configuration mono(6, 1);
        for (int i = 0; i < 50; ++i) {
            const auto log = generate_log(k, mu, 3.0, rng());
            for (Type v : forward_voter(log, mono, 3.0)) CHECK((v == 1 || v == 2));
            CHECK(forward_voter(generate_log(k, MutationMeasure::none(3), 3.0, rng()), mono, 3.0) == mono);
        }
    }

    TEST_CASE("dual paths coalesce after meeting")
    {
        CounterRng rng(44);
        const auto k = random_kernel(5, rng);
        for (int i = 0; i < 100; ++i) {
            const auto log = generate_log(k, MutationMeasure::none(1), 4.0, rng());
            const auto a = backward_dual(log, 0, 4.0), b = backward_dual(log, 3, 4.0);
            const double meet = dual_meeting_time(a, b);
            if (std::isinf(meet)) continue;
            CHECK(a.position(meet) == b.position(meet));
            for (double s = meet; s <= 4.0; s += 0.05) CHECK(a.position(s) == b.position(s));
        }
    }

    TEST_CASE("dual endpoint law equals the semigroup")
    {
        CounterRng rng(45);
        const auto k = random_kernel(5, rng);
        const double t = 0.8;
        const auto qt = semigroup(k, t);
        const int replicas = 100000;
        std::vector<double> counts(5, 0.0);
        for (int r = 0; r < replicas; ++r) counts[backward_dual(generate_log(k, MutationMeasure::none(1), t, replica_seed(7, r)), 2, t).end()] += 1.0;
        double tv = 0.0;
        for (Site y = 0; y < 5; ++y) tv += 0.5 * std::abs(counts[y] / replicas - qt(2, y));
        CHECK(tv < 0.01);
    }

    TEST_CASE("event log round trip")
    {
        CounterRng rng(46);
        const auto k = random_kernel(4, rng);
        const auto log = generate_log(k, MutationMeasure({0.5, 0.5}), 3.0, 1234);
        std::stringstream buffer;
        write_event_log(buffer, log);
        CHECK(buffer.str().substr(0, 4) == "VLOG");
        CHECK(same_log(log, read_event_log(buffer)));
        std::stringstream bad("XXXX");
        CHECK_THROWS_AS(read_event_log(bad), std::runtime_error);
        std::stringstream truncated(std::string(buffer.str()).substr(0, 30));
        CHECK_THROWS_AS(read_event_log(truncated), std::runtime_error);
    }

    TEST_CASE("duality gap bound")
    {
        CounterRng rng(47);
        const auto k = random_kernel(5, rng);
        const auto f = discrete_indicator(3);
        const auto xi0 = random_configuration(5, 3, rng);

        const auto diagonal = duality_gap_bound(k, MutationMeasure({0.1, 0.1, 0.0}), xi0, 2, 2, f, 1.0, 10000, 3);
        CHECK(diagonal.lhs == 0.0);

        const auto constant = duality_gap_bound(k, MutationMeasure::none(3), Configuration(5, 1), 0, 3, f, 1.0, 10000, 4);
        CHECK(constant.lhs == 0.0);
        CHECK(constant.holds());

        for (double t : {0.5, 2.0})
            for (double total : {0.0, 0.2}) {
                const MutationMeasure mu({total / 2, 0.0, total / 2});
                const auto est = duality_gap_bound(k, mu, xi0, 0, 4, random_pair_function(3, 1.0, true, rng), t, 10000, rng());
                CHECK(est.holds(4.0));
                CHECK(est.rhs >= 0.0);
            }

        auto bad = std::vector<std::vector<double>>(3, std::vector<double>(3, 0.5));
        CHECK_THROWS_AS(duality_gap_bound(k, MutationMeasure::none(3), xi0, 0, 1, PairTestFunction(bad), 1.0, 10000, 1), std::invalid_argument);
        bad = std::vector<std::vector<double>>(3, std::vector<double>(3, 2.0));
        for (int a = 0; a < 3; ++a) bad[a][a] = 0.0;
        CHECK_THROWS_AS(duality_gap_bound(k, MutationMeasure::none(3), xi0, 0, 1, PairTestFunction(bad), 1.0, 10000, 1), std::invalid_argument);
        CHECK_THROWS_AS(duality_gap_bound(k, MutationMeasure::none(3), xi0, 0, 1, f, 1.0, 100, 1), std::invalid_argument);
    }

    TEST_CASE("duality gap bound is identical serially and in parallel")
    {
        CounterRng rng(48);
        const auto k = random_kernel(4, rng);
        const auto xi0 = random_configuration(4, 2, rng);
        const MutationMeasure mu({0.2, 0.3});
        const auto f = discrete_indicator(2);
        const auto a = duality_gap_bound(k, mu, xi0, 0, 1, f, 1.5, 10000, 77, Parallelism::serial());
        const auto b = duality_gap_bound(k, mu, xi0, 0, 1, f, 1.5, 10000, 77, Parallelism{3});
        CHECK(a.lhs == b.lhs);
        CHECK(a.rhs == b.rhs);
        CHECK(a.lhs_se == b.lhs_se);
        CHECK(a.meeting_tail == b.meeting_tail);
    }
}

TEST_SUITE("voter")
{
    TEST_CASE("initial configurations")
    {
        CHECK(distinct_configuration(4) == Configuration{0, 1, 2, 3});
        CHECK(proportional_configuration(4, {1.0, 1.0}) == Configuration{0, 0, 1, 1});
        CHECK(proportional_configuration(4, {3.0, 1.0}) == Configuration{0, 0, 0, 1});
        CHECK_THROWS_AS(proportional_configuration(4, {0.0, 0.0}), std::invalid_argument);
    }

    TEST_CASE("single-site law of the direct simulation matches the semigroup")
    {
        CounterRng rng(49);
        const auto k = random_kernel(5, rng);
        const double t = 0.6;
        const auto qt = semigroup(k, t);
        const int replicas = 100000;
        std::vector<double> counts(5, 0.0);
        for (int r = 0; r < replicas; ++r) {
            auto xi = distinct_configuration(5);
            CounterRng local(replica_seed(8, r));
            simulate_voter(k, MutationMeasure::none(5), xi, {t}, local, nullptr);
            counts[xi[1]] += 1.0;
        }
        double tv = 0.0;
        for (Site y = 0; y < 5; ++y) tv += 0.5 * std::abs(counts[y] / replicas - qt(1, y));
        CHECK(tv < 0.01);
    }

    TEST_CASE("direct simulation and the graphical construction agree in law")
    {
        CounterRng rng(50);
        const auto k = random_kernel(4, rng);
        const MutationMeasure mu({0.3, 0.0, 0.2});
        const Configuration start{0, 1, 1, 2};
        const double t = 1.2;
        const int replicas = 50000;
        std::vector<double> direct, graphical;
        for (int r = 0; r < replicas; ++r) {
            auto xi = start;
            CounterRng local(replica_seed(9, r));
            simulate_voter(k, mu, xi, {t}, local, nullptr);
            direct.push_back(xi[0] == xi[3] ? 1.0 : 0.0);
            const auto g = forward_voter(generate_log(k, mu, t, replica_seed(10, r)), start, t);
            graphical.push_back(g[0] == g[3] ? 1.0 : 0.0);
        }
        const auto a = mean_estimate(direct), b = mean_estimate(graphical);
        CHECK(std::abs(a.value - b.value) <= 4.0 * std::hypot(a.se, b.se));
    }

    TEST_CASE("observer sees every grid time")
    {
        const auto k = complete(6);
        auto xi = distinct_configuration(6);
        CounterRng rng(51);
        std::vector<std::size_t> seen;
        simulate_voter(k, MutationMeasure::none(6), xi, {0.0, 0.5, 0.5, 2.0}, rng,
                       [&](std::size_t i, const Configuration& c) {
                           seen.push_back(i);
                           CHECK(c.size() == 6);
                       });
        CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3});
        CHECK_THROWS_AS(simulate_voter(k, MutationMeasure::none(6), xi, {1.0, 0.5}, rng, nullptr), std::invalid_argument);
    }
}

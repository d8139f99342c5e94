#include "voterlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "voterlab/coalescent.hpp"
#include "voterlab/fvref.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/graphical.hpp"
#include "voterlab/instances.hpp"
#include "voterlab/measures.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/voter.hpp"

namespace voterlab {

Table& SuiteResult::table(const std::string& name, std::vector<std::string> columns)
{
    tables.push_back({name, std::move(columns), {}});
    return tables.back();
}

// ---------------------------------------------------------------------------
// Shared configuration helpers

namespace {

// Stream tags keep the parts of a suite on disjoint seeds.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag)
{
    return replica_seed(seed, (tag << 32) | 0x5eedULL);
}

ConfigError config_error(const ExperimentConfig& config, const std::string& key, const std::string& what)
{
    const std::size_t line = config.line_of(key);
    return ConfigError(config.origin() + (line ? ":" + std::to_string(line) : std::string()) + ": key '" + key +
                       "': " + what);
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::vector<std::size_t> config_sizes(const ExperimentConfig& config)
{
    std::vector<std::size_t> sizes;
    if (config.has("sizes"))
        sizes = config.get<std::vector<std::size_t>>("sizes");
    else if (config.has("n"))
        sizes = {config.get<std::size_t>("n")};
    else
        throw ConfigError(config.origin() + ": missing required key 'sizes'");
    if (sizes.empty()) throw config_error(config, "sizes", "must list at least one size");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 2) throw config_error(config, "sizes", "every size must be at least 2");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw config_error(config, "sizes", "must be strictly increasing");
    }
    return sizes;
}

std::vector<double> config_time_grid(const ExperimentConfig& config)
{
    const auto grid = config.get_or<std::vector<double>>("time_grid", {0.0, 0.25, 0.5, 1.0, 2.0, 3.0});
    if (grid.empty()) throw config_error(config, "time_grid", "must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw config_error(config, "time_grid", "times must be nonnegative");
        if (i > 0 && grid[i] <= grid[i - 1]) throw config_error(config, "time_grid", "must be strictly increasing");
    }
    return grid;
}

Kernel kernel_for_size(const ExperimentConfig& config, std::size_t n)
{
    if (config.has("kernel")) {
        Kernel k = kernel_from_json(config.values().at("kernel"));
        if (k.size() != n) throw config_error(config, "kernel", "inline kernel size differs from the requested size");
        return k;
    }
    const auto family = parse_graph_family(config.get_or<std::string>("family", "complete"));
    GraphParams params;
    params.edge_probability = config.get_or("p", params.edge_probability);
    params.seed = config.get_or<std::uint64_t>("graph_seed", params.seed);
    return build_graph_family(family, n, params);
}

TypeSetup type_setup(const ExperimentConfig& config, std::size_t n)
{
    const Json spec = config.has("types") ? config.values().at("types") : Json{{"kind", "discrete"}, {"count", "per_site"}};
    std::optional<TypeSpace> space;
    MutationMeasure explicit_mu;
    if (spec.contains("labels")) {
        space = type_space_from_json(spec);
        explicit_mu = mutation_from_json(spec, *space);
    } else {
        const std::string kind = spec.value("kind", "discrete");
        std::size_t count = n;
        if (spec.contains("count") && !(spec.at("count").is_string() && spec.at("count") == "per_site"))
            count = spec.at("count").get<std::size_t>();
        if (count < 1) throw config_error(config, "types", "count must be positive");
        if (kind == "discrete")
            space = TypeSpace::discrete(count);
        else if (kind == "line")
            space = TypeSpace::equally_spaced(count);
        else
            throw config_error(config, "types", "unknown kind '" + kind + "' (expected discrete or line)");
        explicit_mu = MutationMeasure::none(count);
    }

    MutationMeasure mu = explicit_mu;
    if (config.has("mutation")) {
        const Json& m = config.values().at("mutation");
        std::vector<double> w(space->size(), 0.0);
        for (const auto& atom : m.at("atoms")) {
            const auto idx = atom.at(0).get<std::size_t>();
            if (idx >= w.size()) throw config_error(config, "mutation", "atom index outside the type space");
            w[idx] += atom.at(1).get<double>();
        }
        mu = MutationMeasure(std::move(w));
    }
    return {std::move(*space), std::move(mu)};
}

namespace {

struct GammaValue {
    double value = 0.0;
    double se = 0.0;
    std::string method;
};

GammaValue gamma_for(const Kernel& kernel, const ExperimentConfig& config, std::uint64_t seed, Parallelism par)
{
    const auto exact_max = config.get_or<std::size_t>("gamma_exact_max", 600);
    if (kernel.size() <= exact_max) return {gamma_exact(kernel), 0.0, "exact"};
    const auto replicas = config.get_or<std::size_t>("gamma_replicas", 10000);
    const GammaEstimate g = gamma_mc(kernel, replicas, seed, par);
    return {g.value, g.se, "monte_carlo"};
}

Json diagnostics_row(const Kernel& kernel, double gamma, std::size_t n, const ExperimentConfig& config,
                     Table& table, const std::string& gamma_method)
{
    const auto limit = config.get_or<std::size_t>("diagnostics_max", 512);
    Json out{{"size", n}, {"gamma", gamma}, {"pi_diag", kernel.pi_diag()}, {"pi_max", kernel.pi_max()}};
    if (n > limit) {
        table.add({n, gamma, gamma_method, kernel.pi_diag(), kernel.pi_max(), nullptr, nullptr, nullptr, nullptr, nullptr});
        return out;
    }
    const MixingReport r = mixing_report(kernel, gamma);
    const Json gc = r.gap ? Json(r.gap->conventional) : Json(nullptr);
    const Json gl = r.gap ? Json(r.gap->literal) : Json(nullptr);
    const Json gr = r.gap ? Json(r.gap_ratio) : Json(nullptr);
    table.add({n, gamma, gamma_method, r.pi_diag, r.pi_max, r.t_mix, r.mixing_ratio, gc, gl, gr});
    out["t_mix"] = r.t_mix;
    out["mixing_ratio"] = r.mixing_ratio;
    out["gap_ratio"] = gr;
    return out;
}

const std::vector<std::string> kDiagnosticColumns = {"size",   "gamma",          "gamma_method", "pi_diag",
                                                     "pi_max", "t_mix",          "t_mix_over_gamma",
                                                     "gap_conventional", "gap_literal", "gap_ratio"};

bool within(double value, double reference, double tolerance) { return std::abs(value - reference) <= tolerance; }

bool rel_close(double a, double b, double rel, double floor)
{
    const double diff = std::abs(a - b);
    return diff <= rel * std::max(std::abs(a), std::abs(b)) || diff <= floor;
}

}  // namespace

// ---------------------------------------------------------------------------
// duality

SuiteResult run_duality_suite(const ExperimentConfig& config, const SuiteOptions& options)
{
    SuiteResult res;
    res.suite = "duality";
    config.require({"instances"});
    const auto instances = config.get<std::size_t>("instances");
    const auto max_sites = config.get_or<std::size_t>("max_sites", 8);
    const auto max_types = config.get_or<std::size_t>("max_types", 4);
    const double max_time = config.get_or("max_time", 5.0);
    const double max_mutation = config.get_or("max_mutation", 1.0);
    const double zero_share = config.get_or("zero_mutation_share", 0.25);
    const auto bound_instances = config.get_or<std::size_t>("bound_instances", 100);
    const auto bound_replicas = config.get_or<std::size_t>("bound_replicas", 10000);
    if (max_sites < 2 || max_sites > 64) throw config_error(config, "max_sites", "must lie in 2..64");
    if (max_types < 1) throw config_error(config, "max_types", "must be positive");
    if (!(max_time > 0.0)) throw config_error(config, "max_time", "must be positive");
    if (!(max_mutation >= 0.0)) throw config_error(config, "max_mutation", "must be nonnegative");

    Table& table = res.table("duality", {"instance", "seed", "sites", "types", "time", "mu_total", "events",
                                         "match", "types_conserved"});
    std::size_t matches = 0;
    std::size_t zero_mutation = 0;
    const std::uint64_t path_seed = sub_seed(options.seed, 1);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t seed = replica_seed(path_seed, i);
        CounterRng rng(seed, 1);
        const std::size_t n = 2 + rng.below(max_sites - 1);
        const std::size_t m = 1 + rng.below(max_types);
        const double t = max_time * rng.uniform_open_low();
        const Kernel kernel = random_kernel(n, rng, rng.uniform() < 0.5 ? 1.0 : 0.5);
        const MutationMeasure mu = (max_mutation == 0.0 || rng.uniform() < zero_share)
                                       ? MutationMeasure::none(m)
                                       : random_mutation(m, max_mutation, rng);
        const Configuration xi0 = random_configuration(n, m, rng);
        const EventLog log = generate_log(kernel, mu, t, seed);
        const bool match = duality_check(log, xi0, t);
        bool conserved = true;
        if (mu.is_zero()) {
            ++zero_mutation;
            const Configuration xi = forward_voter(log, xi0, t);
            const std::set<Type> before(xi0.begin(), xi0.end());
            for (Type s : xi) conserved = conserved && before.count(s) > 0;
        }
        if (options.log_dir && (i == 0 || !match || !conserved)) {
            std::filesystem::create_directories(*options.log_dir);
            std::ofstream out(*options.log_dir / ("instance_" + std::to_string(i) + ".vlog"), std::ios::binary);
            write_event_log(out, log);
        }
        table.add({i, std::to_string(seed), n, m, t, mu.total(), log.event_count(), match, conserved});
        matches += match && conserved;
        if (!match || !conserved) {
            res.fail("pathwise duality failed on instance " + std::to_string(i) + " (seed " + std::to_string(seed) +
                     (match ? ", type creation without mutation)" : ")"));
            break;
        }
    }
    res.metrics["instances"] = table.rows.size();
    res.metrics["matches"] = matches;
    res.metrics["match_rate"] = table.rows.empty() ? 0.0 : static_cast<double>(matches) / table.rows.size();
    res.metrics["zero_mutation_instances"] = zero_mutation;

    Table& bound = res.table("duality_bound", {"instance", "seed", "sites", "types", "time", "mu_total", "x", "y",
                                               "lhs", "lhs_se", "rhs", "rhs_se", "meeting_tail", "holds"});
    const std::uint64_t bound_seed = sub_seed(options.seed, 2);
    std::size_t held = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bound_instances; ++i) {
        const std::uint64_t seed = replica_seed(bound_seed, i);
        CounterRng rng(seed, 1);
        const std::size_t n = 2 + rng.below(max_sites - 1);
        const std::size_t m = 2 + rng.below(std::max<std::size_t>(max_types, 2) - 1);
        const double t = max_time * rng.uniform_open_low();
        const Kernel kernel = random_kernel(n, rng, rng.uniform() < 0.5 ? 1.0 : 0.5);
        const MutationMeasure mu = (max_mutation == 0.0 || rng.uniform() < zero_share)
                                       ? MutationMeasure::none(m)
                                       : random_mutation(m, max_mutation, rng);
        const Configuration xi0 = random_configuration(n, m, rng);
        const auto x = static_cast<Site>(rng.below(n));
        const auto y = static_cast<Site>((x + 1 + rng.below(n - 1)) % n);
        const PairTestFunction f = random_pair_function(m, 1.0, true, rng);
        const DualityGapEstimate e = duality_gap_bound(kernel, mu, xi0, x, y, f, t, bound_replicas, seed, options.par);
        const bool ok = e.holds(4.0);
        held += ok;
        worst_margin = std::max(worst_margin, (e.lhs - e.rhs) / std::sqrt(e.lhs_se * e.lhs_se + e.rhs_se * e.rhs_se + 1e-300));
        bound.add({i, std::to_string(seed), n, m, t, mu.total(), x, y, e.lhs, e.lhs_se, e.rhs, e.rhs_se, e.meeting_tail, ok});
        if (!ok)
            res.fail("duality bound violated on instance " + std::to_string(i) + ": lhs " + fmt(e.lhs) + " > rhs " +
                     fmt(e.rhs) + " + 4 SE");
    }
    res.metrics["bound_instances"] = bound_instances;
    res.metrics["bound_held"] = held;
    if (bound_instances > 0) res.metrics["bound_worst_margin_sigmas"] = worst_margin;
    return res;
}

// ---------------------------------------------------------------------------
// generators

namespace {

// The closed forms and the enumeration oracle agree to relative 1e-10; the
// absolute floor covers values that cancel to rounding level.
constexpr double kOracleRel = 1e-10;
constexpr double kOracleFloor = 1e-13;

struct PropMainRow {
    double lhs = 0.0;
    double lhs_se = 0.0;
    double bracket_mixing = 0.0;
    double bracket_gap = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

SuiteResult run_generator_suite(const ExperimentConfig& config, const SuiteOptions& options)
{
    SuiteResult res;
    res.suite = "generators";
    config.require({"instances"});
    const auto instances = config.get<std::size_t>("instances");
    const auto max_sites = config.get_or<std::size_t>("max_sites", 6);
    const auto max_types = config.get_or<std::size_t>("max_types", 4);
    const auto max_order = config.get_or<std::size_t>("max_order", 3);
    const double max_mutation = config.get_or("max_mutation", 2.0);
    if (max_sites < 2 || max_sites > 6) throw config_error(config, "max_sites", "must lie in 2..6");
    if (max_types < 1 || max_types > 4) throw config_error(config, "max_types", "must lie in 1..4");
    if (max_order < 1 || max_order > 16) throw config_error(config, "max_order", "must lie in 1..16");

    Table& table = res.table("generators", {"instance", "sites", "types", "order", "mu_total", "monochromatic",
                                            "phi_closed", "phi_brute", "pair_closed", "pair_brute", "voter_phi",
                                            "bound_rhs", "fv_closed", "fv_variance", "pass"});
    const std::uint64_t base = sub_seed(options.seed, 3);
    std::size_t passed = 0;
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
        CounterRng rng(replica_seed(base, i));
        const std::size_t n = 2 + rng.below(max_sites - 1);
        const std::size_t m = 1 + rng.below(max_types);
        const std::size_t k = 1 + rng.below(max_order);
        const Kernel kernel = random_kernel(n, rng, rng.uniform() < 0.5 ? 1.0 : 0.6);
        const MutationMeasure mu =
            rng.uniform() < 0.25 ? MutationMeasure::none(m) : random_mutation(m, max_mutation, rng);
        const bool mono = rng.uniform() < 0.1;
        Configuration xi = random_configuration(n, m, rng);
        if (mono) std::fill(xi.begin(), xi.end(), xi.front());
        const ProductTestFunction phi = random_product_function(k, m, 2.0, rng);
        const PairTestFunction f = random_pair_function(m, 2.0, false, rng);
        const auto& pi = kernel.pi();

        std::vector<std::string> problems;
        auto check = [&](bool ok, const std::string& what) {
            if (!ok) problems.push_back(what);
        };
        auto rel_err = [](double a, double b) {
            return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
        };

        const double voter_phi = voter_generator_phi(kernel, phi, xi);
        const double phi_closed = voter_phi + mutation_generator_phi(mu, pi, phi, xi);
        const double phi_brute = brute_generator(
            kernel, mu, [&](const Configuration& c) { return phi_eval(phi, empirical(c, pi, m)); }, xi);
        check(rel_close(phi_closed, phi_brute, kOracleRel, kOracleFloor), "phi closed form differs from enumeration");

        const double voter_pair = voter_generator_pair(kernel, f, xi);
        const double pair_closed = voter_pair + mutation_generator_pair(mu, pi, f, xi);
        const double pair_brute =
            brute_generator(kernel, mu, [&](const Configuration& c) { return f.evaluate(pi, c); }, xi);
        check(rel_close(pair_closed, pair_brute, kOracleRel, kOracleFloor), "pair closed form differs from enumeration");
        if (std::abs(phi_closed - phi_brute) > kOracleFloor) worst_rel = std::max(worst_rel, rel_err(phi_closed, phi_brute));
        if (std::abs(pair_closed - pair_brute) > kOracleFloor) worst_rel = std::max(worst_rel, rel_err(pair_closed, pair_brute));

        if (k == 1) check(std::abs(voter_phi) <= kOracleFloor, "voter part nonzero for k = 1");
        if (mono) {
            check(std::abs(voter_phi) <= kOracleFloor, "voter phi part nonzero on a monochromatic configuration");
            check(std::abs(voter_pair) <= kOracleFloor, "voter pair part nonzero on a monochromatic configuration");
        }
        if (k == 2) {
            double direct = 0.0;
            for (Site x = 0; x < n; ++x)
                for (Site y : kernel.support(x)) direct += pi[x] * pi[x] * kernel(x, y) * phi.delta(0b11, xi[y], xi[x]);
            check(rel_close(voter_phi, direct, kOracleRel, kOracleFloor), "k = 2 specialization differs");
        }
        const double bound_rhs = phi_bound_constant(phi) * discordance(kernel, xi);
        check(std::abs(voter_phi) <= bound_rhs * (1.0 + 1e-12) + kOracleFloor, "voter phi part exceeds C_phi bound");

        const FiniteMeasure lambda = random_measure(m, 1 + rng.below(m), rng);
        const std::vector<double> g = phi.factor(0);
        const ProductTestFunction square({g, g});
        const double fv_closed = fleming_viot_generator(MutationMeasure::none(m), square, lambda);
        double mean = 0.0;
        double second = 0.0;
        for (Type s = 0; s < m; ++s) {
            mean += g[s] * lambda[s];
            second += g[s] * g[s] * lambda[s];
        }
        const double variance = second - mean * mean;
        check(rel_close(fv_closed, variance, kOracleRel, kOracleFloor), "Fleming-Viot k = 2 form differs from the variance");

        const bool ok = problems.empty();
        passed += ok;
        table.add({i, n, m, k, mu.total(), mono, phi_closed, phi_brute, pair_closed, pair_brute, voter_phi, bound_rhs,
                   fv_closed, variance, ok});
        if (!ok) {
            std::ostringstream dump;
            dump << "instance " << i << ": " << problems.front() << " (sites " << n << ", types " << m << ", k " << k
                 << ", kernel " << kernel_to_json(kernel).dump() << ", xi [";
            for (std::size_t x = 0; x < n; ++x) dump << (x ? "," : "") << xi[x];
            dump << "])";
            res.fail(dump.str());
            break;
        }
    }
    res.metrics["instances"] = table.rows.size();
    res.metrics["passed"] = passed;
    res.metrics["pass_rate"] = table.rows.empty() ? 0.0 : static_cast<double>(passed) / table.rows.size();
    res.metrics["worst_relative_error"] = worst_rel;

    // Generator-comparison estimates for phi in Phi_2 without mutation,
    // evaluated on sampled configurations. The worst ratio found is a lower
    // bound on the supremum over all configurations.
    const auto checks = config.get_or<std::size_t>("bound_checks", 4);
    const auto xi_samples = config.get_or<std::size_t>("xi_samples", 4);
    const auto replicas = config.get_or<std::size_t>("bound_replicas", 2000);
    Table& comp = res.table("generator_comparison",
                            {"check", "sites", "types", "s", "t", "sample", "lhs", "lhs_se", "c_phi",
                             "bracket_mixing", "bracket_gap", "ratio_mixing", "ratio_gap"});
    const std::uint64_t comp_seed = sub_seed(options.seed, 4);
    double worst_mixing = 0.0;
    double worst_gap = 0.0;
    for (std::size_t c = 0; c < checks; ++c) {
        CounterRng rng(replica_seed(comp_seed, c));
        const std::size_t n = 3 + rng.below(std::max<std::size_t>(max_sites, 3) - 2);
        const std::size_t m = 2 + rng.below(std::max<std::size_t>(max_types, 2) - 1);
        const bool symmetric = rng.uniform() < 0.5;
        const Kernel kernel = symmetric ? build_graph_family(GraphFamily::complete, n) : random_kernel(n, rng);
        const double t = 0.2 + 2.8 * rng.uniform();
        const double s = t * (0.1 + 0.8 * rng.uniform());
        const ProductTestFunction phi = random_product_function(2, m, 1.0, rng);
        const double c_phi = phi_bound_constant(phi);
        const auto& pi = kernel.pi();
        const PairLaw law(kernel);

        std::vector<double> meet(replicas);
        const std::uint64_t meet_seed = replica_seed(comp_seed, (c << 20) | 1);
        for_each_replica(replicas, options.par, [&](std::size_t r) {
            CounterRng local(replica_seed(meet_seed, r));
            const auto [v, w] = law.sample(local);
            meet[r] = meeting_time_sample(kernel, v, w, local, t * 1.000001).time;
        });
        double above_s = 0.0, above_t = 0.0;
        for (double mt : meet) {
            above_s += mt > s;
            above_t += mt > t;
        }
        above_s /= static_cast<double>(replicas);
        above_t /= static_cast<double>(replicas);
        const double in_window = above_s - above_t;
        const double pd = kernel.pi_diag();
        const double bracket_mixing = pd * in_window + tv_distance_max(kernel, t - s) * pd * above_t;
        double bracket_gap = std::numeric_limits<double>::quiet_NaN();
        if (kernel.is_reversible(1e-10))
            bracket_gap = pd * in_window + kernel.pi_max() * std::exp(-spectral_gap(kernel).conventional * (t - s));

        const std::uint64_t voter_seed = replica_seed(comp_seed, (c << 20) | 2);
        for (std::size_t j = 0; j < xi_samples; ++j) {
            const Configuration xi0 = random_configuration(n, m, rng);
            const double fv = fleming_viot_generator(MutationMeasure::none(m), phi, empirical(xi0, pi, m));
            std::vector<double> values(replicas);
            const std::uint64_t run_seed = replica_seed(voter_seed, j);
            for_each_replica(replicas, options.par, [&](std::size_t r) {
                CounterRng local(replica_seed(run_seed, r));
                Configuration xi = xi0;
                simulate_voter(kernel, MutationMeasure::none(m), xi, {t}, local, [](std::size_t, const Configuration&) {});
                values[r] = voter_generator_phi(kernel, phi, xi);
            });
            const Estimate e = mean_estimate(values);
            const double lhs = std::abs(e.value - 2.0 * pd * above_s * fv);
            const double ratio_mixing = lhs / (c_phi * bracket_mixing);
            const double ratio_gap = lhs / (c_phi * bracket_gap);
            worst_mixing = std::max(worst_mixing, ratio_mixing);
            if (std::isfinite(ratio_gap)) worst_gap = std::max(worst_gap, ratio_gap);
            comp.add({c, n, m, s, t, j, lhs, e.se, c_phi, bracket_mixing, std::isfinite(bracket_gap) ? Json(bracket_gap) : Json(nullptr),
                      ratio_mixing, std::isfinite(ratio_gap) ? Json(ratio_gap) : Json(nullptr)});
        }
    }
    res.metrics["comparison_worst_ratio_mixing"] = worst_mixing;
    res.metrics["comparison_worst_ratio_gap"] = worst_gap;
    res.metrics["comparison_note"] = "worst case over sampled configurations; lower-bounds the supremum";
    return res;
}

// ---------------------------------------------------------------------------
// meeting

SuiteResult run_meeting_suite(const ExperimentConfig& config, const SuiteOptions& options)
{
    SuiteResult res;
    res.suite = "meeting";
    config.require({"family", "sizes", "replicas"});
    const auto sizes = config_sizes(config);
    const auto grid = config_time_grid(config);
    const auto replicas = config.get<std::size_t>("replicas");
    if (replicas < 2) throw config_error(config, "replicas", "must be at least 2");
    const auto block_replicas = config.get_or<std::size_t>("block_replicas", replicas);
    const auto kingman_replicas = config.get_or<std::size_t>("kingman_replicas", block_replicas);
    const auto j_list = config.get_or<std::vector<std::size_t>>("j_list", {1, 2, 5});
    const double cap_factor = config.get_or("cap_factor", 50.0);
    const double ks_threshold = config.get_or("ks_threshold", 0.03);
    const auto ks_min_size = config.get_or<std::size_t>("ks_min_size", 500);
    const auto mc_check_max = config.get_or<std::size_t>("gamma_mc_check_max", 64);
    const bool dump_samples = config.get_or("dump_samples", false);
    const bool complete = config.get_or<std::string>("family", "complete") == "complete" && !config.has("kernel");

    Table& diag = res.table("diagnostics", kDiagnosticColumns);
    Table& tail = res.table("meeting_tail", {"size", "t", "tail", "tail_se", "tail_limit", "tail_exact", "integral",
                                             "integral_se", "integral_limit", "integral_exact", "censored"});
    Table& blocks = res.table("block_hitting", {"size", "j", "replica", "value", "censored"});
    Table& block_ks = res.table("block_ks", {"size", "j", "ks", "median_scaled", "kingman_median", "censored"});
    Table* samples = dump_samples ? &res.table("meeting_samples", {"size", "replica", "value", "censored"}) : nullptr;

    Json per_size = Json::array();
    std::vector<double> tail_errors;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::size_t n = sizes[si];
        const std::uint64_t seed = replica_seed(sub_seed(options.seed, 5), n);
        const Kernel kernel = kernel_for_size(config, n);
        const GammaValue g = gamma_for(kernel, config, replica_seed(seed, 1), options.par);
        Json entry = diagnostics_row(kernel, g.value, n, config, diag, g.method);
        entry["gamma_method"] = g.method;
        const double nd = static_cast<double>(n);

        if (complete && g.method == "exact") {
            const double closed = (nd - 1.0) * (nd - 1.0) / (2.0 * nd);
            entry["gamma_closed_form"] = closed;
            if (!within(g.value, closed, 1e-8))
                res.fail("gamma_exact(K_" + std::to_string(n) + ") = " + fmt(g.value) + " differs from " + fmt(closed));
        }
        if (g.method == "exact" && n <= mc_check_max) {
            const GammaEstimate mc = gamma_mc(kernel, std::max<std::size_t>(replicas, 1000), replica_seed(seed, 2), options.par);
            entry["gamma_mc"] = mc.value;
            entry["gamma_mc_se"] = mc.se;
            if (!within(mc.value, g.value, 3.0 * mc.se))
                res.fail("gamma_mc differs from gamma_exact by more than 3 SE at size " + std::to_string(n));
        }

        const TailProfile profile = meeting_tail_profile(kernel, g.value, grid, replicas, replica_seed(seed, 3), options.par);
        double sup_err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid[i];
            const double limit = std::exp(-t);
            const double integral_limit = -std::expm1(-t);
            Json exact = nullptr;
            Json integral_exact = nullptr;
            if (complete) {
                const double r = (nd - 1.0) / nd;
                exact = r * r * std::exp(-t * r);
                integral_exact = r * -std::expm1(-t * r);
                // 1e-9 absorbs the solver error in gamma, which scales every value.
                if (!within(profile.tail[i].value, exact.get<double>(), 3.0 * profile.tail[i].se + 1e-9))
                    res.fail("rescaled meeting tail at size " + std::to_string(n) + ", t = " + fmt(t) +
                             " is more than 3 SE from the exact value");
                if (!within(profile.integral[i].value, integral_exact.get<double>(), 3.0 * profile.integral[i].se + 1e-9))
                    res.fail("integrated meeting tail at size " + std::to_string(n) + ", t = " + fmt(t) +
                             " is more than 3 SE from the exact value");
            }
            sup_err = std::max(sup_err, std::abs(profile.tail[i].value - limit));
            tail.add({n, t, profile.tail[i].value, profile.tail[i].se, limit, exact, profile.integral[i].value,
                      profile.integral[i].se, integral_limit, integral_exact, profile.censored});
        }
        entry["tail_sup_error"] = sup_err;
        tail_errors.push_back(sup_err);

        if (samples) {
            const PairLaw law(kernel);
            for (std::size_t r = 0; r < replicas; ++r) {
                CounterRng rng(replica_seed(replica_seed(seed, 3), r));
                const auto [v, w] = law.sample(rng);
                const MeetingSample m = meeting_time_sample(kernel, v, w, rng, cap_factor * g.value);
                samples->add({n, r, m.time, m.censored});
            }
        }

        std::vector<std::size_t> js;
        for (std::size_t j : j_list)
            if (j >= 1 && j <= n) js.push_back(j);
        if (!js.empty() && block_replicas > 0) {
            const double cap = cap_factor * g.value;
            const auto runs = block_hitting_table(kernel, js, block_replicas, replica_seed(seed, 4), options.par, cap);
            for (std::size_t ji = 0; ji < js.size(); ++ji) {
                std::vector<double> scaled;
                std::size_t censored = 0;
                for (std::size_t r = 0; r < runs.size(); ++r) {
                    blocks.add({n, js[ji], r, runs[r].times[ji], static_cast<bool>(runs[r].censored[ji])});
                    censored += runs[r].censored[ji];
                    scaled.push_back(runs[r].times[ji] / g.value);
                }
                std::vector<double> reference(kingman_replicas);
                const std::uint64_t kseed = replica_seed(seed, 100 + js[ji]);
                for_each_replica(kingman_replicas, options.par, [&](std::size_t r) {
                    CounterRng rng(replica_seed(kseed, r));
                    reference[r] = kingman_tail_sample(js[ji], rng);
                });
                const double ks = ks_two_sample(scaled, reference);
                const double frac = static_cast<double>(censored) / static_cast<double>(runs.size());
                block_ks.add({n, js[ji], ks, median(scaled), median(reference), censored});
                entry["block_ks_j" + std::to_string(js[ji])] = ks;
                if (frac > 0.01)
                    res.fail("censoring above 1% for block hitting at size " + std::to_string(n) + ", j = " +
                             std::to_string(js[ji]));
                if (complete && n >= ks_min_size && !(ks < ks_threshold))
                    res.fail("block-count KS " + fmt(ks) + " >= " + fmt(ks_threshold) + " at size " + std::to_string(n) +
                             ", j = " + std::to_string(js[ji]));
            }
        }
        per_size.push_back(std::move(entry));
    }
    res.metrics["sizes"] = per_size;
    bool decreasing = true;
    for (std::size_t i = 1; i < tail_errors.size(); ++i) decreasing = decreasing && tail_errors[i] <= tail_errors[i - 1];
    res.metrics["tail_error_decreasing"] = decreasing;
    return res;
}

// ---------------------------------------------------------------------------
// convergence sweep

namespace {

struct SweepSetup {
    TypeSpace space;
    MutationMeasure target;
    Configuration xi0;
    bool distinct = false;
    std::vector<double> f;
};

SweepSetup sweep_setup(const ExperimentConfig& config, std::size_t n)
{
    TypeSetup types = type_setup(config, n);
    SweepSetup s{std::move(types.space), std::move(types.mutation), {}, false, {}};
    const Json initial = config.has("initial") ? config.values().at("initial") : Json("distinct");
    if (initial.is_string() && initial == "distinct") {
        if (s.space.size() < n) throw config_error(config, "initial", "distinct start needs at least one type per site");
        s.xi0 = distinct_configuration(n);
        s.distinct = true;
    } else if (initial.is_object() && initial.contains("weights")) {
        auto w = initial.at("weights").get<std::vector<double>>();
        if (w.size() != s.space.size()) throw config_error(config, "initial", "weights must match the type count");
        s.xi0 = proportional_configuration(n, w);
    } else {
        throw config_error(config, "initial", "expected \"distinct\" or {\"weights\": [...]}");
    }
    const std::size_t m = s.space.size();
    const Json f = config.has("f") ? config.values().at("f") : Json("half");
    if (f.is_string() && f == "half") {
        // Indicator of the lower half of the types present at time 0.
        const Type top = *std::max_element(s.xi0.begin(), s.xi0.end());
        s.f.assign(m, 0.0);
        for (Type a = 0; a <= top / 2 && a < m; ++a) s.f[a] = 1.0;
        if (top == 0) s.f.assign(m, 1.0);
    } else if (f.is_array()) {
        s.f = f.get<std::vector<double>>();
        if (s.f.size() != m) throw config_error(config, "f", "must have one value per type");
    } else {
        throw config_error(config, "f", "expected \"half\" or an array");
    }
    return s;
}

double pairing(const std::vector<double>& f, const FiniteMeasure& lambda)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * lambda.weights[i];
    return s;
}

struct Observations {
    // [time][replica]
    std::vector<std::vector<double>> m1, m2, div, ent, atoms;
    Observations(std::size_t times, std::size_t replicas)
        : m1(times, std::vector<double>(replicas)), m2(m1), div(m1), ent(m1), atoms(m1)
    {
    }
};

}  // namespace

SuiteResult run_convergence_sweep(const ExperimentConfig& config, const SuiteOptions& options)
{
    SuiteResult res;
    res.suite = "sweep";
    config.require({"family", "sizes", "replicas"});
    const auto sizes = config_sizes(config);
    const auto grid = config_time_grid(config);
    const auto replicas = config.get<std::size_t>("replicas");
    if (replicas < 2) throw config_error(config, "replicas", "must be at least 2");
    const auto fv_replicas = config.get_or<std::size_t>("fv_replicas", 10000);
    const auto monotone_times = config.get_or<std::vector<double>>("monotone_times", {1.0});
    const bool complete = config.get_or<std::string>("family", "complete") == "complete" && !config.has("kernel");
    const bool assert_convergence = config.get_or("assert_convergence", complete);
    const std::string hash = config.hash();

    Table& diag = res.table("diagnostics", kDiagnosticColumns);
    Table& sweep = res.table("sweep", {"size", "t", "model_time", "replicas", "moment1", "moment1_se", "moment1_ref",
                                       "moment2", "moment2_se", "moment2_ref", "moment2_ref_se", "diversity",
                                       "diversity_se", "diversity_ref", "diversity_ref_se", "diversity_err",
                                       "entropy", "entropy_se", "entropy_ref", "entropy_ref_se", "atoms_median",
                                       "seed", "config_hash"});
    Table& reference = res.table("fv_reference", {"size", "t", "quantity", "moment", "stderr"});

    struct ErrorPoint {
        double err, se;
    };
    std::map<double, std::vector<ErrorPoint>> errors_by_time;
    Json per_size = Json::array();
    std::vector<double> pi_diags;
    std::vector<double> mixing_ratios;
    for (std::size_t n : sizes) {
        const std::uint64_t seed = replica_seed(sub_seed(options.seed, 6), n);
        const Kernel kernel = kernel_for_size(config, n);
        const GammaValue g = gamma_for(kernel, config, replica_seed(seed, 1), options.par);
        Json entry = diagnostics_row(kernel, g.value, n, config, diag, g.method);
        pi_diags.push_back(kernel.pi_diag());
        if (entry.contains("mixing_ratio")) mixing_ratios.push_back(entry["mixing_ratio"].get<double>());

        const SweepSetup setup = sweep_setup(config, n);
        const std::size_t m = setup.space.size();
        const MutationMeasure mu_n = setup.target.scaled(1.0 / g.value);
        const double theta = setup.target.total();
        std::vector<double> model_times;
        for (double t : grid) model_times.push_back(g.value * t);

        Observations obs(grid.size(), replicas);
        const auto& pi = kernel.pi();
        const FiniteMeasure x0 = empirical(setup.xi0, pi, m);
        for_each_replica(replicas, options.par, [&](std::size_t r) {
            CounterRng rng(replica_seed(replica_seed(seed, 2), r));
            Configuration xi = setup.xi0;
            simulate_voter(kernel, mu_n, xi, model_times, rng, [&](std::size_t i, const Configuration& c) {
                const FiniteMeasure x = empirical(c, pi, m);
                const double p = pairing(setup.f, x);
                obs.m1[i][r] = p;
                obs.m2[i][r] = p * p;
                obs.div[i][r] = diversity(x);
                obs.ent[i][r] = entropy(x);
                obs.atoms[i][r] = static_cast<double>(atom_count(x));
            });
        });

        // Fleming-Viot references.
        const double p0 = pairing(setup.f, x0);
        std::vector<double> f2(setup.f);
        for (double& v : f2) v *= v;
        const double p0_sq = pairing(f2, x0);
        FVSpec atomic_spec{x0, setup.target};
        FVSpec limit_spec{setup.distinct ? std::nullopt : std::optional<FiniteMeasure>(x0), setup.target};

        std::vector<std::vector<double>> entropy_ref;
        const bool entropy_available = setup.distinct && setup.target.is_zero();
        std::vector<double> positive_times;
        for (double t : grid)
            if (t > 0.0) positive_times.push_back(t);
        if (entropy_available && !positive_times.empty()) {
            entropy_ref.assign(positive_times.size(), std::vector<double>(fv_replicas));
            const std::uint64_t eseed = replica_seed(seed, 3);
            for_each_replica(fv_replicas, options.par, [&](std::size_t r) {
                CounterRng rng(replica_seed(eseed, r));
                const auto counts = kingman_block_counts(positive_times, rng);
                for (std::size_t i = 0; i < counts.size(); ++i) {
                    const auto masses = uniform_simplex_masses(counts[i], rng);
                    double h = 0.0;
                    for (double a : masses) h -= a * std::log(a);
                    entropy_ref[i][r] = h;
                }
            });
        }

        std::size_t positive_index = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid[i];
            const Estimate m1 = mean_estimate(obs.m1[i]);
            const Estimate m2 = mean_estimate(obs.m2[i]);
            const Estimate dv = mean_estimate(obs.div[i]);
            const Estimate en = mean_estimate(obs.ent[i]);

            Estimate m1_ref{p0, 0.0};
            Estimate m2_ref{std::exp(-t) * p0 * p0 - std::expm1(-t) * p0_sq, 0.0};
            Estimate dv_ref;
            if (theta > 0.0 && t > 0.0) {
                const std::uint64_t fseed = replica_seed(seed, 10 + i);
                m1_ref = fv_moment(atomic_spec, ProductTestFunction({setup.f}), t, std::max<std::size_t>(fv_replicas, 1000),
                                   replica_seed(fseed, 1), options.par);
                m2_ref = fv_moment(atomic_spec, ProductTestFunction({setup.f, setup.f}), t,
                                   std::max<std::size_t>(fv_replicas, 1000), replica_seed(fseed, 2), options.par);
            }
            if (setup.distinct && theta == 0.0)
                dv_ref = {fv_diversity_mean(0.0, t), 0.0};
            else if (theta == 0.0)
                dv_ref = {std::exp(-t) * diversity(x0) - std::expm1(-t), 0.0};
            else
                dv_ref = fv_pair_identity(limit_spec, t, std::max<std::size_t>(fv_replicas, 2), replica_seed(seed, 20 + i),
                                          options.par);
            Json ent_ref = nullptr;
            Json ent_ref_se = nullptr;
            if (entropy_available) {
                if (t > 0.0) {
                    const Estimate e = mean_estimate(entropy_ref[positive_index]);
                    ent_ref = e.value;
                    ent_ref_se = e.se;
                }
            }
            if (t > 0.0) ++positive_index;

            const double err = std::abs(dv.value - dv_ref.value);
            sweep.add({n, t, model_times[i], replicas, m1.value, m1.se, m1_ref.value, m2.value, m2.se, m2_ref.value,
                       m2_ref.se, dv.value, dv.se, dv_ref.value, dv_ref.se, err, en.value, en.se, ent_ref, ent_ref_se,
                       median(obs.atoms[i]), std::to_string(options.seed), hash});
            reference.add({n, t, "moment1", m1_ref.value, m1_ref.se});
            reference.add({n, t, "moment2", m2_ref.value, m2_ref.se});
            reference.add({n, t, "diversity", dv_ref.value, dv_ref.se});
            if (!ent_ref.is_null()) reference.add({n, t, "entropy", ent_ref, ent_ref_se});
            errors_by_time[t].push_back({err, std::hypot(dv.se, dv_ref.se)});

            if (theta == 0.0 && t > 0.0 && !within(m1.value, p0, 3.0 * m1.se + 1e-12))
                res.fail("first moment not flat at size " + std::to_string(n) + ", t = " + fmt(t) + ": " +
                         fmt(m1.value) + " vs " + fmt(p0));
            if (assert_convergence && t > 0.0) {
                const double tol = std::max(3.0 * std::hypot(dv.se, dv_ref.se), 2.0 / static_cast<double>(n));
                if (err > tol)
                    res.fail("mean diversity at size " + std::to_string(n) + ", t = " + fmt(t) + " is " + fmt(dv.value) +
                             ", reference " + fmt(dv_ref.value));
            }
        }
        per_size.push_back(std::move(entry));
    }

    // Error must not grow as N increases, within 2-sigma bands.
    Json monotone = Json::array();
    for (double t : monotone_times) {
        const auto it = errors_by_time.find(t);
        if (it == errors_by_time.end()) continue;
        for (std::size_t i = 1; i < it->second.size(); ++i) {
            const auto& a = it->second[i - 1];
            const auto& b = it->second[i];
            const bool ok = b.err <= a.err + 2.0 * std::hypot(a.se, b.se);
            monotone.push_back({{"t", t}, {"from", sizes[i - 1]}, {"to", sizes[i]}, {"ok", ok}});
            if (!ok && assert_convergence)
                res.fail("diversity error grew from size " + std::to_string(sizes[i - 1]) + " to " +
                         std::to_string(sizes[i]) + " at t = " + fmt(t));
        }
    }
    res.metrics["sizes"] = per_size;
    res.metrics["monotonicity"] = monotone;
    bool pi_decreasing = true;
    for (std::size_t i = 1; i < pi_diags.size(); ++i) pi_decreasing = pi_decreasing && pi_diags[i] < pi_diags[i - 1];
    bool mixing_decreasing = true;
    for (std::size_t i = 1; i < mixing_ratios.size(); ++i)
        mixing_decreasing = mixing_decreasing && mixing_ratios[i] < mixing_ratios[i - 1];
    res.metrics["pi_diag_decreasing"] = pi_decreasing;
    res.metrics["mixing_ratio_decreasing"] = mixing_decreasing;
    return res;
}

// ---------------------------------------------------------------------------
// atomic

SuiteResult run_atomic_suite(const ExperimentConfig& config, const SuiteOptions& options)
{
    SuiteResult res;
    res.suite = "atomic";
    config.require({"family", "sizes", "replicas"});
    const auto sizes = config_sizes(config);
    const auto grid = config_time_grid(config);
    const auto replicas = config.get<std::size_t>("replicas");
    if (replicas < 2) throw config_error(config, "replicas", "must be at least 2");
    const auto epsilons = config.get_or<std::vector<double>>("epsilons", {0.05, 0.1, 0.2, 0.5});
    for (double e : epsilons)
        if (!(e > 0.0) || e > 1.0) throw config_error(config, "epsilons", "values must lie in (0, 1]");
    const auto triples = config.get_or<std::size_t>("metric_triples", 1000);
    const auto fv_replicas = config.get_or<std::size_t>("fv_replicas", 4000);
    const auto median_min_size = config.get_or<std::size_t>("median_min_size", 256);
    const bool complete = config.get_or<std::string>("family", "complete") == "complete" && !config.has("kernel");

    // Metric axioms on random triples.
    Table& axioms = res.table("metric_axioms", {"triple", "points", "rho_ab", "rho_bc", "rho_ac", "symmetric",
                                                "triangle_slack", "prohorov_agreement"});
    const std::uint64_t tseed = sub_seed(options.seed, 7);
    double worst_triangle = 0.0;
    double worst_agreement = 0.0;
    bool symmetric = true;
    bool identity = true;
    for (std::size_t i = 0; i < triples; ++i) {
        CounterRng rng(replica_seed(tseed, i));
        const std::size_t points = 2 + rng.below(7);
        const TypeSpace space = random_euclidean_space(points, 1 + rng.below(2), rng);
        const FiniteMeasure a = random_measure(points, 1 + rng.below(points), rng);
        const FiniteMeasure b = random_measure(points, 1 + rng.below(points), rng);
        const FiniteMeasure c = random_measure(points, 1 + rng.below(points), rng);
        const double ab = rho_a(a, b, space), ba = rho_a(b, a, space);
        const double bc = rho_a(b, c, space), cb = rho_a(c, b, space);
        const double ac = rho_a(a, c, space), ca = rho_a(c, a, space);
        const bool sym = ab == ba && bc == cb && ac == ca;
        symmetric = symmetric && sym;
        identity = identity && rho_a(a, a, space) == 0.0;
        const double slack = std::max({ac - ab - bc, ab - ac - bc, bc - ab - ac});
        worst_triangle = std::max(worst_triangle, slack);
        const double agreement = std::abs(prohorov(a, b, space) - prohorov_by_subsets(a, b, space));
        worst_agreement = std::max(worst_agreement, agreement);
        axioms.add({i, points, ab, bc, ac, sym, slack, agreement});
    }
    if (!symmetric) res.fail("rho_a is not exactly symmetric");
    if (!identity) res.fail("rho_a(lambda, lambda) is not zero");
    if (worst_triangle > 1e-9) res.fail("rho_a triangle inequality violated by " + fmt(worst_triangle));
    if (worst_agreement > 1e-12) res.fail("max-flow and subset Prohorov distances disagree by " + fmt(worst_agreement));
    res.metrics["metric_triples"] = triples;
    res.metrics["worst_triangle_violation"] = worst_triangle;
    res.metrics["prohorov_route_disagreement"] = worst_agreement;

    // Colliding atoms: lambda_k = (delta_0 + delta_{1/k}) / 2 against delta_0.
    Table& colliding = res.table("colliding_atoms", {"k", "distance", "prohorov", "atomic", "rho_a"});
    double previous = std::numeric_limits<double>::infinity();
    bool colliding_ok = true;
    for (std::size_t k = 1; k <= 1024; k *= 2) {
        const double d = 1.0 / static_cast<double>(k);
        const TypeSpace space({"0", "1/" + std::to_string(k)}, {{0.0, d}, {d, 0.0}});
        const FiniteMeasure lambda({0.5, 0.5});
        const FiniteMeasure nu({1.0, 0.0});
        const double p = prohorov(lambda, nu, space);
        const double a = atomic_discrepancy(lambda, nu, space);
        colliding.add({k, d, p, a, p + a});
        colliding_ok = colliding_ok && p <= std::min(d, 0.5) + 1e-12 && p <= previous && within(a, 0.5, 1e-12);
        previous = p;
    }
    if (!colliding_ok) res.fail("colliding-atoms sequence does not show prohorov -> 0 with rho_a -> 1/2");
    res.metrics["colliding_final_prohorov"] = previous;

    Table& annulus = res.table("annulus", {"size", "epsilon", "scaled_mass"});
    Table& functional = res.table("atomic_functional", {"size", "epsilon", "t", "mean", "se", "sup_t_mean"});
    Table& atoms_table = res.table("atoms", {"size", "t", "atoms_median", "kingman_median", "entropy", "entropy_se",
                                             "entropy_ref", "entropy_ref_se", "entropy_within_3se"});
    Json per_size = Json::array();
    for (std::size_t n : sizes) {
        const std::uint64_t seed = replica_seed(sub_seed(options.seed, 8), n);
        const Kernel kernel = kernel_for_size(config, n);
        const GammaValue g = gamma_for(kernel, config, replica_seed(seed, 1), options.par);
        TypeSetup types = type_setup(config, n);
        const TypeSpace& space = types.space;
        const std::size_t m = space.size();
        const MutationMeasure mu_n = types.mutation.scaled(1.0 / g.value);
        const bool distinct = !config.has("initial") || config.values().at("initial") == "distinct";
        Configuration xi0;
        if (distinct) {
            if (m < n) throw config_error(config, "types", "distinct start needs at least one type per site");
            xi0 = distinct_configuration(n);
        } else {
            xi0 = proportional_configuration(n, config.values().at("initial").at("weights").get<std::vector<double>>());
        }
        Json entry{{"size", n}, {"gamma", g.value}};

        // max_tau gamma_n mu_n{sigma : 0 < d(sigma, tau) <= eps}
        for (double eps : epsilons) {
            double worst = 0.0;
            for (Type tau = 0; tau < m; ++tau) {
                double mass = 0.0;
                for (Type s = 0; s < m; ++s) {
                    const double d = space.distance(s, tau);
                    if (d > 0.0 && d <= eps) mass += mu_n.weight(s);
                }
                worst = std::max(worst, g.value * mass);
            }
            annulus.add({n, eps, worst});
        }

        std::vector<double> model_times;
        for (double t : grid) model_times.push_back(g.value * t);
        const auto& pi = kernel.pi();
        const std::size_t ne = epsilons.size();
        // values[(time * ne + eps)][replica]
        std::vector<std::vector<double>> fvals(grid.size() * ne, std::vector<double>(replicas));
        std::vector<std::vector<double>> atoms(grid.size(), std::vector<double>(replicas));
        std::vector<std::vector<double>> ents(grid.size(), std::vector<double>(replicas));
        std::vector<double> initial_f(ne);
        {
            const FiniteMeasure x0 = empirical(xi0, pi, m);
            for (std::size_t e = 0; e < ne; ++e)
                initial_f[e] = mollified_self_mass(x0, space, epsilons[e]) - diversity(x0);
        }
        for_each_replica(replicas, options.par, [&](std::size_t r) {
            CounterRng rng(replica_seed(replica_seed(seed, 2), r));
            Configuration xi = xi0;
            simulate_voter(kernel, mu_n, xi, model_times, rng, [&](std::size_t i, const Configuration& c) {
                const FiniteMeasure x = empirical(c, pi, m);
                atoms[i][r] = static_cast<double>(atom_count(x));
                ents[i][r] = entropy(x);
                for (std::size_t e = 0; e < ne; ++e)
                    fvals[i * ne + e][r] = model_times[i] == 0.0
                                               ? initial_f[e]
                                               : mollified_self_mass(x, space, epsilons[e]) - diversity(x);
            });
        });

        for (std::size_t e = 0; e < ne; ++e) {
            double sup_mean = 0.0;
            std::vector<Estimate> est;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                est.push_back(mean_estimate(fvals[i * ne + e]));
                sup_mean = std::max(sup_mean, est.back().value);
            }
            for (std::size_t i = 0; i < grid.size(); ++i)
                functional.add({n, epsilons[e], grid[i], est[i].value, est[i].se, sup_mean});
            entry["sup_t_functional_eps" + fmt(epsilons[e])] = sup_mean;
            bool separated = true;
            for (Type a = 0; a < m && separated; ++a)
                for (Type b = 0; b < m && separated; ++b)
                    separated = a == b || space.distance(a, b) >= 1.0;
            if (separated && epsilons[e] < 1.0 && sup_mean > 1e-15)
                res.fail("atomic functional nonzero on a well-separated type space");
        }

        const bool kingman_applies = distinct && types.mutation.is_zero();
        std::vector<double> positive_times;
        for (double t : grid)
            if (t > 0.0) positive_times.push_back(t);
        std::vector<std::vector<double>> kcounts(positive_times.size(), std::vector<double>(fv_replicas));
        std::vector<std::vector<double>> kents(positive_times.size(), std::vector<double>(fv_replicas));
        if (kingman_applies && !positive_times.empty()) {
            const std::uint64_t kseed = replica_seed(seed, 3);
            for_each_replica(fv_replicas, options.par, [&](std::size_t r) {
                CounterRng rng(replica_seed(kseed, r));
                const auto counts = kingman_block_counts(positive_times, rng);
                for (std::size_t i = 0; i < counts.size(); ++i) {
                    kcounts[i][r] = static_cast<double>(counts[i]);
                    double h = 0.0;
                    for (double a : uniform_simplex_masses(counts[i], rng)) h -= a * std::log(a);
                    kents[i][r] = h;
                }
            });
        }
        std::size_t pi_index = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid[i];
            const double med = median(atoms[i]);
            const Estimate h = mean_estimate(ents[i]);
            if (kingman_applies && t > 0.0) {
                const double kmed = median(kcounts[pi_index]);
                const Estimate href = mean_estimate(kents[pi_index]);
                const bool ok = within(h.value, href.value, 3.0 * std::hypot(h.se, href.se));
                atoms_table.add({n, t, med, kmed, h.value, h.se, href.value, href.se, ok});
                if (t == 1.0) {
                    entry["atoms_median_t1"] = med;
                    entry["kingman_median_t1"] = kmed;
                }
                if (complete && t == 1.0 && n >= median_min_size && std::abs(med - kmed) > 1.0)
                    res.fail("median atom count at t = 1 (" + fmt(med) + ") is more than one block from the Kingman median (" +
                             fmt(kmed) + ") at size " + std::to_string(n));
                ++pi_index;
            } else {
                atoms_table.add({n, t, med, nullptr, h.value, h.se, nullptr, nullptr, nullptr});
            }
        }
        per_size.push_back(std::move(entry));
    }
    res.metrics["sizes"] = per_size;
    return res;
}

// ---------------------------------------------------------------------------
// dispatch and reporting

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = {"duality", "generators", "meeting", "sweep", "atomic"};
    return names;
}

SuiteResult run_suite(const std::string& name, const ExperimentConfig& config, const SuiteOptions& options)
{
    if (config.has("suite") && config.get<std::string>("suite") != name)
        throw ConfigError(config.origin() + ":" + std::to_string(config.line_of("suite")) + ": config is for suite '" +
                          config.get<std::string>("suite") + "', not '" + name + "'");
    if (name == "duality") return run_duality_suite(config, options);
    if (name == "generators") return run_generator_suite(config, options);
    if (name == "meeting") return run_meeting_suite(config, options);
    if (name == "sweep") return run_convergence_sweep(config, options);
    if (name == "atomic") return run_atomic_suite(config, options);
    throw std::invalid_argument("unknown suite '" + name + "'");
}

std::string csv_cell(const Json& value)
{
    if (value.is_null()) return "";
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    if (value.is_number_integer()) return value.dump();
    if (value.is_number_float()) {
        const double v = value.get<double>();
        if (std::isnan(v)) return "nan";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
        return quoted + "\"";
    }
    return csv_cell(Json(value.dump()));
}

void emit_report(const SuiteResult& result, const ExperimentConfig& config, const SuiteOptions& options,
                 const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    Json tables = Json::array();
    for (const auto& table : result.tables) {
        const auto path = out_dir / (table.name + ".csv");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
        out << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
            out << '\n';
        }
        tables.push_back(table.name + ".csv");
    }
    const Json report{{"suite", result.suite},
                      {"config_hash", config.hash()},
                      {"seed", options.seed},
                      {"pass", result.pass},
                      {"status", result.pass ? "pass" : "fail"},
                      {"failures", result.failures},
                      {"metrics", result.metrics},
                      {"tables", tables}};
    std::ofstream out(out_dir / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json");
    out << report.dump(2) << '\n';
}

}  // namespace voterlab

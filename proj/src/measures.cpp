#include "voterlab/measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

namespace voterlab {

FiniteMeasure empirical(const Configuration& xi, std::span<const double> pi, std::size_t types)
{
    if (xi.size() != pi.size()) throw std::invalid_argument("empirical: configuration and stationary law differ in size");
    std::vector<double> w(types, 0.0);
    for (std::size_t x = 0; x < xi.size(); ++x) {
        if (xi[x] >= types) throw std::invalid_argument("empirical: type outside the type space");
        w[xi[x]] += pi[x];
    }
    return FiniteMeasure(std::move(w));
}

std::vector<double> atoms_desc(const FiniteMeasure& lambda)
{
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda.weights[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lambda.weights[a] > lambda.weights[b]; });
    std::vector<double> masses;
    masses.reserve(order.size());
    for (auto i : order) masses.push_back(lambda.weights[i]);
    return masses;
}

std::size_t atom_count(const FiniteMeasure& lambda)
{
    return static_cast<std::size_t>(
        std::count_if(lambda.weights.begin(), lambda.weights.end(), [](double w) { return w > 0.0; }));
}

double entropy(const FiniteMeasure& lambda)
{
    double h = 0.0;
    for (double a : lambda.weights)
        if (a > 0.0) h -= a * std::log(a);
    return h;
}

double diversity(const FiniteMeasure& lambda)
{
    double d = 0.0;
    for (double a : lambda.weights) d += a * a;
    return d;
}

FiniteMeasure star(const FiniteMeasure& lambda)
{
    std::vector<double> w = lambda.weights;
    for (double& a : w) a *= a;
    return FiniteMeasure(std::move(w));
}

namespace {

void check_space(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space)
{
    if (lambda.size() != space.size() || nu.size() != space.size())
        throw std::invalid_argument("measures live on different type spaces");
}

std::vector<Type> support(const FiniteMeasure& lambda)
{
    std::vector<Type> s;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda.weights[i] > 0.0) s.push_back(static_cast<Type>(i));
    return s;
}

}  // namespace

double mollified_self_mass(const FiniteMeasure& lambda, const TypeSpace& space, double eps)
{
    if (!(eps > 0.0)) throw std::invalid_argument("mollified_self_mass: eps must be positive");
    if (lambda.size() != space.size()) throw std::invalid_argument("measure and type space differ in size");
    const auto supp = support(lambda);
    double total = 0.0;
    for (Type a : supp)
        for (Type b : supp) total += lambda.weights[a] * lambda.weights[b] * mollifier(space.distance(a, b) / eps);
    return total;
}

double atomic_discrepancy(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space)
{
    check_space(lambda, nu, space);
    std::vector<double> radii{1.0};
    for (const auto* m : {&lambda, &nu}) {
        const auto supp = support(*m);
        for (Type a : supp)
            for (Type b : supp) {
                const double d = space.distance(a, b);
                if (d > 0.0 && d < 1.0) radii.push_back(d);
            }
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    // eps -> 0+: only the diagonal survives.
    double best = std::abs(diversity(lambda) - diversity(nu));
    for (double eps : radii)
        best = std::max(best, std::abs(mollified_self_mass(lambda, space, eps) - mollified_self_mass(nu, space, eps)));
    return best;
}

namespace {

using Violation = std::function<double(const FiniteMeasure&, const FiniteMeasure&, const TypeSpace&, double)>;

/// max_B [from(B) - to(B^eps)] via max-flow on the bipartite graph of pairs
/// within distance eps.
double violation_by_flow(const FiniteMeasure& from, const FiniteMeasure& to, const TypeSpace& space, double eps)
{
    using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
    using Graph = boost::adjacency_list<
        boost::vecS, boost::vecS, boost::directedS, boost::no_property,
        boost::property<boost::edge_capacity_t, double,
                        boost::property<boost::edge_residual_capacity_t, double,
                                        boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

    const auto left = support(from);
    const auto right = support(to);
    const std::size_t source = 0;
    const std::size_t sink = 1;
    Graph g(2 + left.size() + right.size());
    auto capacity = boost::get(boost::edge_capacity, g);
    auto reverse = boost::get(boost::edge_reverse, g);
    auto add = [&](std::size_t u, std::size_t v, double cap) {
        auto e = boost::add_edge(u, v, g).first;
        auto r = boost::add_edge(v, u, g).first;
        capacity[e] = cap;
        capacity[r] = 0.0;
        reverse[e] = r;
        reverse[r] = e;
    };
    double mass = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        const double w = from.weights[left[i]];
        mass += w;
        add(source, 2 + i, w);
        for (std::size_t j = 0; j < right.size(); ++j)
            if (space.distance(left[i], right[j]) <= eps) add(2 + i, 2 + left.size() + j, w);
    }
    for (std::size_t j = 0; j < right.size(); ++j) add(2 + left.size() + j, sink, to.weights[right[j]]);
    const double flow = boost::edmonds_karp_max_flow(g, source, sink);
    return std::max(0.0, mass - flow);
}

/// Same quantity by enumerating subsets B of the support of `from`.
double violation_by_subsets(const FiniteMeasure& from, const FiniteMeasure& to, const TypeSpace& space, double eps)
{
    const auto left = support(from);
    const auto right = support(to);
    if (left.size() > 24 || right.size() > 24) throw std::length_error("prohorov_by_subsets: support larger than 24 atoms");
    std::vector<std::uint32_t> reach(left.size(), 0);
    for (std::size_t i = 0; i < left.size(); ++i)
        for (std::size_t j = 0; j < right.size(); ++j)
            if (space.distance(left[i], right[j]) <= eps) reach[i] |= 1u << j;

    const std::size_t count = std::size_t{1} << left.size();
    std::vector<std::uint32_t> neighborhood(count, 0);
    std::vector<double> mass(count, 0.0);
    double worst = 0.0;
    for (std::size_t b = 1; b < count; ++b) {
        const auto low = static_cast<std::size_t>(std::countr_zero(b));
        const std::size_t rest = b & (b - 1);
        neighborhood[b] = neighborhood[rest] | reach[low];
        mass[b] = mass[rest] + from.weights[left[low]];
        double covered = 0.0;
        for (std::size_t j = 0; j < right.size(); ++j)
            if (neighborhood[b] & (1u << j)) covered += to.weights[right[j]];
        worst = std::max(worst, mass[b] - covered);
    }
    return worst;
}

double prohorov_with(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space,
                     const Violation& violation)
{
    check_space(lambda, nu, space);
    const auto a = support(lambda);
    const auto b = support(nu);
    std::vector<double> radii{0.0};
    for (Type s : a)
        for (Type t : b) radii.push_back(space.distance(s, t));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    // eps >= max total mass is always feasible.
    double best = std::max(lambda.total(), nu.total());
    for (double r : radii) {
        if (r >= best) break;
        const double v = std::max(violation(lambda, nu, space, r), violation(nu, lambda, space, r));
        best = std::min(best, std::max(r, v));
    }
    return best;
}

}  // namespace

double prohorov(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space)
{
    return prohorov_with(lambda, nu, space, violation_by_flow);
}

double prohorov_by_subsets(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space)
{
    return prohorov_with(lambda, nu, space, violation_by_subsets);
}

double rho_a(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space)
{
    return prohorov(lambda, nu, space) + atomic_discrepancy(lambda, nu, space);
}

}  // namespace voterlab

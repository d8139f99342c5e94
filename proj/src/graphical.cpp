#include "voterlab/graphical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "voterlab/stats.hpp"

namespace voterlab {

std::size_t EventLog::event_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& a : arrows) n += a.size();
    for (const auto& m : mutations) n += m.size();
    return n;
}

EventLog generate_log(const Kernel& kernel, const MutationMeasure& mu, double horizon, std::uint64_t seed)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("generate_log: horizon must be positive");
    const std::size_t n = kernel.size();
    const double rate = mu.total();
    const double expected = static_cast<double>(n) * horizon * (1.0 + rate);
    if (expected > kMaxExpectedEvents) throw std::length_error("generate_log: expected event count exceeds 1e8");

    EventLog log;
    log.horizon = horizon;
    log.seed = seed;
    log.arrows.resize(n);
    log.mutations.resize(n);

    AliasTable marks;
    if (rate > 0.0) marks = AliasTable(mu.weights());

    for (Site x = 0; x < n; ++x) {
        CounterRng arrow_rng(seed, 2 * static_cast<std::uint64_t>(x));
        for (double t = arrow_rng.exponential(1.0); t <= horizon; t += arrow_rng.exponential(1.0))
            log.arrows[x].push_back({t, kernel.sample_target(x, arrow_rng)});
        if (rate > 0.0) {
            CounterRng mark_rng(seed, 2 * static_cast<std::uint64_t>(x) + 1);
            for (double t = mark_rng.exponential(rate); t <= horizon; t += mark_rng.exponential(rate))
                log.mutations[x].push_back({t, static_cast<Type>(marks.sample(mark_rng))});
        }
    }
    return log;
}

namespace {

struct EventKey {
    double time;
    Site site;
    std::uint8_t kind;

    friend bool operator<(const EventKey& a, const EventKey& b) noexcept
    {
        return std::tie(a.time, a.site, a.kind) < std::tie(b.time, b.site, b.kind);
    }
};

void check_time(const EventLog& log, double t)
{
    if (!(t >= 0.0)) throw std::invalid_argument("negative time");
    if (t > log.horizon) throw std::invalid_argument("time beyond the log horizon");
}

}  // namespace

Configuration forward_voter(const EventLog& log, const Configuration& xi0, double t)
{
    check_time(log, t);
    if (xi0.size() != log.sites()) throw std::invalid_argument("forward_voter: configuration size does not match the log");

    struct Event {
        EventKey key;
        std::uint32_t payload;
    };
    std::vector<Event> events;
    for (Site x = 0; x < log.sites(); ++x) {
        for (const auto& a : log.arrows[x]) {
            if (a.time > t) break;
            events.push_back({{a.time, x, static_cast<std::uint8_t>(EventKind::arrow)}, a.target});
        }
        for (const auto& m : log.mutations[x]) {
            if (m.time > t) break;
            events.push_back({{m.time, x, static_cast<std::uint8_t>(EventKind::mutation)}, m.type});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.key < b.key; });

    Configuration xi = xi0;
    for (const auto& e : events) {
        if (e.key.kind == static_cast<std::uint8_t>(EventKind::arrow))
            xi[e.key.site] = xi[e.payload];
        else
            xi[e.key.site] = e.payload;
    }
    return xi;
}

Site DualPath::position(double s) const noexcept
{
    const auto it = std::upper_bound(jumps.begin(), jumps.end(), s,
                                     [](double value, const std::pair<double, Site>& j) { return value < j.first; });
    return it == jumps.begin() ? start : std::prev(it)->second;
}

DualPath backward_dual(const EventLog& log, Site x, double t)
{
    check_time(log, t);
    if (x >= log.sites()) throw std::out_of_range("backward_dual: site outside the log");

    DualPath path;
    path.start = x;
    path.time = t;

    // Only events strictly before `bound` in (time, site, kind) order can
    // influence the type carried by the path.
    EventKey bound{t, std::numeric_limits<Site>::max(), 0xff};
    Site current = x;
    bool found = false;
    for (;;) {
        const auto& arrows = log.arrows[current];
        const auto& marks = log.mutations[current];
        const auto arrow_it = std::partition_point(arrows.begin(), arrows.end(), [&](const ArrowEvent& a) {
            return EventKey{a.time, current, static_cast<std::uint8_t>(EventKind::arrow)} < bound;
        });
        const bool has_arrow = arrow_it != arrows.begin();
        const ArrowEvent* arrow = has_arrow ? &*std::prev(arrow_it) : nullptr;

        if (!found) {
            const auto mark_it = std::partition_point(marks.begin(), marks.end(), [&](const MutationEvent& m) {
                return EventKey{m.time, current, static_cast<std::uint8_t>(EventKind::mutation)} < bound;
            });
            if (mark_it != marks.begin()) {
                const MutationEvent& mark = *std::prev(mark_it);
                const bool on_segment =
                    !arrow || EventKey{arrow->time, current, static_cast<std::uint8_t>(EventKind::arrow)} <
                                  EventKey{mark.time, current, static_cast<std::uint8_t>(EventKind::mutation)};
                if (on_segment) {
                    found = true;
                    path.first_mutation = t - mark.time;
                    path.mutant = mark.type;
                }
            }
        }
        if (!arrow) break;
        path.jumps.emplace_back(t - arrow->time, arrow->target);
        bound = EventKey{arrow->time, current, static_cast<std::uint8_t>(EventKind::arrow)};
        current = arrow->target;
    }
    return path;
}

double dual_meeting_time(const DualPath& a, const DualPath& b)
{
    if (a.time != b.time) throw std::invalid_argument("dual_meeting_time: paths start at different times");
    if (a.start == b.start) return 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.jumps.size() || j < b.jumps.size()) {
        const double sa = i < a.jumps.size() ? a.jumps[i].first : std::numeric_limits<double>::infinity();
        const double sb = j < b.jumps.size() ? b.jumps[j].first : std::numeric_limits<double>::infinity();
        const double s = std::min(sa, sb);
        while (i < a.jumps.size() && a.jumps[i].first <= s) ++i;
        while (j < b.jumps.size() && b.jumps[j].first <= s) ++j;
        const Site pa = i == 0 ? a.start : a.jumps[i - 1].second;
        const Site pb = j == 0 ? b.start : b.jumps[j - 1].second;
        if (pa == pb) return s;
    }
    return std::numeric_limits<double>::infinity();
}

bool duality_check(const EventLog& log, const Configuration& xi0, double t)
{
    const Configuration xi = forward_voter(log, xi0, t);
    for (Site x = 0; x < log.sites(); ++x) {
        const DualPath path = backward_dual(log, x, t);
        const Type predicted = path.first_mutation <= t ? *path.mutant : xi0[path.end()];
        if (xi[x] != predicted) return false;
    }
    return true;
}

bool DualityGapEstimate::holds(double sigmas) const noexcept
{
    return lhs <= rhs + sigmas * std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
}

DualityGapEstimate duality_gap_bound(const Kernel& kernel, const MutationMeasure& mu, const Configuration& xi0, Site x,
                                     Site y, const PairTestFunction& f, double t, std::size_t replicas,
                                     std::uint64_t seed, Parallelism par)
{
    for (Type a = 0; a < f.types(); ++a) {
        if (f(a, a) != 0.0) throw std::invalid_argument("duality_gap_bound: f must vanish on the diagonal");
        for (Type b = 0; b < f.types(); ++b)
            if (std::abs(f(a, b)) > 1.0) throw std::invalid_argument("duality_gap_bound: |f| must be at most 1");
    }
    if (replicas < 10000) throw std::invalid_argument("duality_gap_bound: at least 10^4 replicas required");
    if (!(t > 0.0)) throw std::invalid_argument("duality_gap_bound: t must be positive");
    if (x >= kernel.size() || y >= kernel.size()) throw std::out_of_range("duality_gap_bound: site outside the kernel");
    if (xi0.size() != kernel.size()) throw std::invalid_argument("duality_gap_bound: configuration size mismatch");
    if (mu.size() != f.types()) throw std::invalid_argument("duality_gap_bound: mutation measure and f differ in types");
    for (Type s : xi0)
        if (s >= f.types()) throw std::invalid_argument("duality_gap_bound: configuration type outside f's domain");

    const double rate = mu.total();
    const double no_mutation_factor = 1.0 - std::exp(-2.0 * rate * t);
    std::vector<double> diff(replicas), bound(replicas), tail(replicas);
    for_each_replica(replicas, par, [&](std::size_t r) {
        const EventLog log = generate_log(kernel, mu, t, replica_seed(seed, r));
        const Configuration xi = forward_voter(log, xi0, t);
        const DualPath px = backward_dual(log, x, t);
        const DualPath py = backward_dual(log, y, t);
        diff[r] = f(xi[x], xi[y]) - f(xi0[px.end()], xi0[py.end()]);
        const double meet = dual_meeting_time(px, py);
        tail[r] = meet > t ? 1.0 : 0.0;
        bound[r] = no_mutation_factor * tail[r] + 2.0 * rate * std::min(meet, t);
    });

    const Estimate d = mean_estimate(diff);
    const Estimate b = mean_estimate(bound);
    DualityGapEstimate out;
    out.lhs = std::abs(d.value);
    out.lhs_se = d.se;
    out.rhs = b.value;
    out.rhs_se = b.se;
    out.meeting_tail = mean_estimate(tail).value;
    out.replicas = replicas;
    return out;
}

namespace {

template <class T>
void put(std::ostream& out, T value)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(value);
    char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes, sizeof(U));
}

template <class T>
T get(std::istream& in)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    unsigned char bytes[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw std::runtime_error("event log: truncated input");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

constexpr char kMagic[4] = {'V', 'L', 'O', 'G'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_event_log(std::ostream& out, const EventLog& log)
{
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(log.sites()));
    put<std::uint32_t>(out, 0);
    put<double>(out, log.horizon);
    put<std::uint64_t>(out, log.seed);
    for (Site x = 0; x < log.sites(); ++x) {
        put<std::uint64_t>(out, log.arrows[x].size());
        for (const auto& a : log.arrows[x]) {
            put<double>(out, a.time);
            put<std::uint32_t>(out, a.target);
        }
        put<std::uint64_t>(out, log.mutations[x].size());
        for (const auto& m : log.mutations[x]) {
            put<double>(out, m.time);
            put<std::uint32_t>(out, m.type);
        }
    }
    if (!out) throw std::runtime_error("event log: write failed");
}

EventLog read_event_log(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw std::runtime_error("event log: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw std::runtime_error("event log: unsupported version " + std::to_string(version));
    const auto sites = get<std::uint32_t>(in);
    (void)get<std::uint32_t>(in);
    EventLog log;
    log.horizon = get<double>(in);
    log.seed = get<std::uint64_t>(in);
    log.arrows.resize(sites);
    log.mutations.resize(sites);
    for (Site x = 0; x < sites; ++x) {
        const auto arrows = get<std::uint64_t>(in);
        for (std::uint64_t i = 0; i < arrows; ++i) {
            const double time = get<double>(in);
            log.arrows[x].push_back({time, get<std::uint32_t>(in)});
        }
        const auto marks = get<std::uint64_t>(in);
        for (std::uint64_t i = 0; i < marks; ++i) {
            const double time = get<double>(in);
            log.mutations[x].push_back({time, get<std::uint32_t>(in)});
        }
    }
    return log;
}

}  // namespace voterlab

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "voterlab/generators.hpp"
#include "voterlab/kernel.hpp"
#include "voterlab/parallel.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

/// At time `time`, the site holding the arrow adopts the type at `target`.
struct ArrowEvent {
    double time;
    Site target;
};

/// At time `time`, the site is overwritten with `type`.
struct MutationEvent {
    double time;
    Type type;
};

/// Kind of a space-time event; the numeric value breaks ties between
/// simultaneous events as (time, site, kind).
enum class EventKind : std::uint8_t { arrow = 0, mutation = 1 };

/// Materialized graphical representation on (0, horizon]: per-site arrow
/// times (rate 1, targets ~ q(x, .)) and mutation marks (rate mu(1), types
/// ~ mu / mu(1)), each list strictly increasing in time.
struct EventLog {
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::vector<ArrowEvent>> arrows;
    std::vector<std::vector<MutationEvent>> mutations;

    std::size_t sites() const noexcept { return arrows.size(); }
    std::size_t event_count() const noexcept;
};

/// Logs with more than this many expected events are refused.
inline constexpr double kMaxExpectedEvents = 1e8;

/// Site x uses substream 2x for arrows and 2x + 1 for mutation marks.
EventLog generate_log(const Kernel& kernel, const MutationMeasure& mu, double horizon, std::uint64_t seed);

/// xi_t: every event with time <= t applied in (time, site, kind) order.
Configuration forward_voter(const EventLog& log, const Configuration& xi0, double t);

/// Backward path X^{x,t} of a single site, with its first mutation mark.
struct DualPath {
    Site start = 0;
    double time = 0.0;
    /// (backward time s, site entered at s), s increasing in (0, t].
    std::vector<std::pair<double, Site>> jumps;
    /// e(x, t); +inf when the path meets no mutation mark.
    double first_mutation = std::numeric_limits<double>::infinity();
    std::optional<Type> mutant;

    /// X^{x,t}_s for s in [0, t].
    Site position(double s) const noexcept;
    /// X^{x,t}_t
    Site end() const noexcept { return jumps.empty() ? start : jumps.back().second; }
};

DualPath backward_dual(const EventLog& log, Site x, double t);

/// First backward time at which two dual paths from the same time occupy
/// the same site; +inf if they do not meet by s = t.
double dual_meeting_time(const DualPath& a, const DualPath& b);

/// True iff xi_t(x) = M(x,t) when e(x,t) <= t and xi0(X^{x,t}_t) otherwise,
/// for every site x.
bool duality_check(const EventLog& log, const Configuration& xi0, double t);

struct DualityGapEstimate {
    /// |E f(xi_t(x), xi_t(y)) - E f(xi0(X^x_t), xi0(X^y_t))|
    double lhs = 0.0;
    double lhs_se = 0.0;
    /// (1 - e^{-2 mu(1) t}) P(M > t) + 2 mu(1) int_0^t P(M > s) ds
    double rhs = 0.0;
    double rhs_se = 0.0;
    double meeting_tail = 0.0;  // P(M_{x,y} > t)
    std::size_t replicas = 0;

    bool holds(double sigmas = 4.0) const noexcept;
};

/// Monte-Carlo comparison of the voter pair law with the dual pair law on
/// shared event logs. f must vanish on the diagonal with |f| <= 1, and at
/// least 10^4 replicas are required.
DualityGapEstimate duality_gap_bound(const Kernel& kernel, const MutationMeasure& mu, const Configuration& xi0, Site x,
                                     Site y, const PairTestFunction& f, double t, std::size_t replicas,
                                     std::uint64_t seed, Parallelism par = {});

/// Little-endian binary dump: "VLOG", u32 version (1), u32 sites, u32 0,
/// f64 horizon, u64 seed, then per site u64 count + (f64 time, u32 target)
/// arrows followed by u64 count + (f64 time, u32 type) mutation marks.
void write_event_log(std::ostream& out, const EventLog& log);
EventLog read_event_log(std::istream& in);

}  // namespace voterlab

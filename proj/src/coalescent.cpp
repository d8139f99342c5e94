#include "voterlab/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

namespace voterlab {

CoalescingSystem::CoalescingSystem(const Kernel& kernel, const std::vector<Site>& starts)
    : kernel_(&kernel), occupant_(kernel.size(), -1), parent_(starts.size()), rank_(starts.size(), 0),
      root_block_(starts.size(), 0)
{
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    std::vector<std::size_t> order(starts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return starts[a] < starts[b]; });
    for (std::size_t label : order) {
        const Site s = starts[label];
        if (s >= kernel.size()) throw std::out_of_range("coalescing system: start site outside the kernel");
        if (occupant_[s] >= 0) {
            const std::size_t block = static_cast<std::size_t>(occupant_[s]);
            parent_[label] = block_root_[block];
            continue;
        }
        occupant_[s] = static_cast<std::int64_t>(block_site_.size());
        root_block_[label] = block_site_.size();
        block_site_.push_back(s);
        block_root_.push_back(label);
    }
}

CoalescingSystem CoalescingSystem::from_all_sites(const Kernel& kernel)
{
    std::vector<Site> starts(kernel.size());
    std::iota(starts.begin(), starts.end(), Site{0});
    return CoalescingSystem(kernel, starts);
}

std::size_t CoalescingSystem::find(std::size_t label) const
{
    std::size_t root = label;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[label] != root) {
        const std::size_t next = parent_[label];
        parent_[label] = root;
        label = next;
    }
    return root;
}

Site CoalescingSystem::position(std::size_t label) const
{
    if (label >= labels()) throw std::out_of_range("coalescing system: unknown label");
    return block_site_[root_block_[find(label)]];
}

std::vector<std::vector<std::size_t>> CoalescingSystem::partition() const
{
    std::vector<std::vector<std::size_t>> by_root(labels());
    for (std::size_t l = 0; l < labels(); ++l) by_root[find(l)].push_back(l);
    std::vector<std::vector<std::size_t>> blocks;
    for (auto& b : by_root)
        if (!b.empty()) blocks.push_back(std::move(b));
    std::sort(blocks.begin(), blocks.end());
    return blocks;
}

void CoalescingSystem::jump(CounterRng& rng)
{
    const auto moving = static_cast<std::size_t>(rng.below(block_site_.size()));
    const Site from = block_site_[moving];
    const Site to = kernel_->sample_target(from, rng);
    occupant_[from] = -1;
    if (occupant_[to] < 0) {
        occupant_[to] = static_cast<std::int64_t>(moving);
        block_site_[moving] = to;
        return;
    }

    const auto host = static_cast<std::size_t>(occupant_[to]);
    std::size_t a = block_root_[host];
    std::size_t b = block_root_[moving];
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    block_root_[host] = a;
    root_block_[a] = host;

    const std::size_t last = block_site_.size() - 1;
    if (moving != last) {
        block_site_[moving] = block_site_[last];
        block_root_[moving] = block_root_[last];
        occupant_[block_site_[moving]] = static_cast<std::int64_t>(moving);
        root_block_[block_root_[moving]] = moving;
    }
    block_site_.pop_back();
    block_root_.pop_back();
}

void CoalescingSystem::run_until(double t, CounterRng& rng)
{
    if (t < clock_) throw std::invalid_argument("run_until: target time precedes the clock");
    for (;;) {
        const double next = clock_ + rng.exponential(static_cast<double>(block_site_.size()));
        if (next > t) break;
        clock_ = next;
        jump(rng);
    }
    clock_ = t;
}

bool CoalescingSystem::run_until_blocks(std::size_t blocks, CounterRng& rng, double cap)
{
    while (block_site_.size() > blocks) {
        const double next = clock_ + rng.exponential(static_cast<double>(block_site_.size()));
        if (next > cap) {
            clock_ = cap;
            return false;
        }
        clock_ = next;
        jump(rng);
    }
    return true;
}

MeetingSample meeting_time_sample(const Kernel& kernel, Site x, Site y, CounterRng& rng, double cap)
{
    if (!(cap > 0.0)) throw std::invalid_argument("meeting_time_sample: cap must be positive");
    if (x >= kernel.size() || y >= kernel.size()) throw std::out_of_range("meeting_time_sample: site outside the kernel");
    double t = 0.0;
    while (x != y) {
        t += rng.exponential(2.0);
        if (t > cap) return {cap, true};
        if (rng.below(2) == 0)
            x = kernel.sample_target(x, rng);
        else
            y = kernel.sample_target(y, rng);
    }
    return {t, false};
}

namespace {

// Product-chain operator on N x N matrices stored row-major in a vector:
// (L h)(x, y) = 2h - (q h) - (h q^T) off the diagonal and h(x, x) on it.
class MeetingOperator;

}  // namespace
}  // namespace voterlab

namespace Eigen::internal {
template <>
struct traits<voterlab::MeetingOperator> : public Eigen::internal::traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace voterlab {
namespace {

class MeetingOperator : public Eigen::EigenBase<MeetingOperator> {
public:
    using Scalar = double;
    using RealScalar = double;
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

    MeetingOperator(const Matrix& q, bool sparse) : n_(q.rows()), dense_(sparse ? Matrix() : q)
    {
        if (sparse) sparse_ = q.sparseView();
    }

    Eigen::Index rows() const { return n_ * n_; }
    Eigen::Index cols() const { return n_ * n_; }

    void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const
    {
        Eigen::Map<const Matrix> h(in.data(), n_, n_);
        Matrix qh;
        Matrix hq;
        if (sparse_.nonZeros() > 0) {
            qh = sparse_ * h;
            hq = h * sparse_.transpose();
        } else {
            qh.noalias() = dense_ * h;
            hq.noalias() = h * dense_.transpose();
        }
        out.resize(n_ * n_);
        Eigen::Map<Matrix> r(out.data(), n_, n_);
        r = 2.0 * h - qh - hq;
        for (Eigen::Index x = 0; x < n_; ++x) r(x, x) = h(x, x);
    }

    template <class Rhs>
    Eigen::Product<MeetingOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const
    {
        return Eigen::Product<MeetingOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
    }

private:
    Eigen::Index n_;
    Matrix dense_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
};

}  // namespace
}  // namespace voterlab

namespace Eigen::internal {
template <class Rhs>
struct generic_product_impl<voterlab::MeetingOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<voterlab::MeetingOperator, Rhs,
                                generic_product_impl<voterlab::MeetingOperator, Rhs>> {
    using Scalar = typename Product<voterlab::MeetingOperator, Rhs>::Scalar;

    template <class Dest>
    static void scaleAndAddTo(Dest& dst, const voterlab::MeetingOperator& lhs, const Rhs& rhs, const Scalar& alpha)
    {
        Eigen::VectorXd in = rhs;
        Eigen::VectorXd out;
        lhs.apply(in, out);
        dst += alpha * out;
    }
};
}  // namespace Eigen::internal

namespace voterlab {

namespace {

constexpr std::size_t kDenseMeetingLimit = 20;
constexpr std::size_t kMeetingSizeLimit = 1000;
constexpr double kMeetingResidual = 1e-10;

Matrix solve_dense(const Matrix& q)
{
    const Eigen::Index n = q.rows();
    const Eigen::Index dim = n * n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) {
            const Eigen::Index row = x * n + y;
            if (x == y) {
                a(row, row) = 1.0;
                continue;
            }
            a(row, row) += 2.0;
            for (Eigen::Index z = 0; z < n; ++z) {
                a(row, z * n + y) -= q(x, z);
                a(row, x * n + z) -= q(y, z);
            }
            b(row) = 1.0;
        }
    Eigen::VectorXd h = a.partialPivLu().solve(b);
    Matrix out(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) out(x, y) = h(x * n + y);
    return out;
}

Matrix solve_iterative(const Matrix& q)
{
    const Eigen::Index n = q.rows();
    const Eigen::Index nnz = (q.array() != 0.0).count();
    const MeetingOperator op(q, nnz * 4 < n * n);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n * n);
    for (Eigen::Index x = 0; x < n; ++x) b(x * n + x) = 0.0;

    Eigen::BiCGSTAB<MeetingOperator, Eigen::IdentityPreconditioner> solver;
    solver.setTolerance(1e-14);
    solver.setMaxIterations(static_cast<Eigen::Index>(std::max<std::size_t>(1000, 20 * static_cast<std::size_t>(n))));
    solver.compute(op);
    Eigen::VectorXd h = solver.solve(b);
    // A few restarts recover the accuracy BiCGSTAB loses to round-off.
    for (int restart = 0; restart < 5; ++restart) {
        Eigen::VectorXd lh;
        op.apply(h, lh);
        if ((lh - b).cwiseAbs().maxCoeff() <= 0.1 * kMeetingResidual) break;
        h = solver.solveWithGuess(b, h);
    }
    Matrix out(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) out(x, y) = h(x * n + y);
    return out;
}

}  // namespace

Matrix meeting_expectations(const Kernel& kernel)
{
    const std::size_t n = kernel.size();
    if (n > kMeetingSizeLimit)
        throw std::length_error("gamma_exact: more than 1000 sites; use gamma_mc for a Monte-Carlo estimate");
    const Matrix& q = kernel.matrix();
    Matrix h = n <= kDenseMeetingLimit ? solve_dense(q) : solve_iterative(q);
    h.diagonal().setZero();

    Matrix residual = 2.0 * h - q * h - h * q.transpose();
    residual.array() -= 1.0;
    residual.diagonal().setZero();
    const double worst = residual.cwiseAbs().maxCoeff();
    if (!(worst <= kMeetingResidual))
        throw std::runtime_error("gamma_exact: linear solve residual " + std::to_string(worst) + " exceeds 1e-10");
    return h;
}

double gamma_exact(const Kernel& kernel)
{
    const Matrix h = meeting_expectations(kernel);
    const auto& pi = kernel.pi();
    double g = 0.0;
    for (std::size_t x = 0; x < kernel.size(); ++x)
        for (std::size_t y = 0; y < kernel.size(); ++y) g += pi[x] * pi[y] * h(x, y);
    return g;
}

GammaEstimate gamma_mc(const Kernel& kernel, std::size_t replicas, std::uint64_t seed, Parallelism par, double cap)
{
    if (replicas < 1000) throw std::invalid_argument("gamma_mc: at least 10^3 replicas required");
    const AliasTable stationary_law(kernel.pi());
    std::vector<double> times(replicas);
    std::vector<char> censored(replicas, 0);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        const auto x = static_cast<Site>(stationary_law.sample(rng));
        const auto y = static_cast<Site>(stationary_law.sample(rng));
        const MeetingSample m = meeting_time_sample(kernel, x, y, rng, cap);
        times[r] = m.time;
        censored[r] = m.censored;
    });
    const Estimate e = mean_estimate(times);
    return {e.value, e.se, static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1))};
}

TailProfile meeting_tail_profile(const Kernel& kernel, double gamma, const std::vector<double>& times,
                                 std::size_t replicas, std::uint64_t seed, Parallelism par)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("meeting_tail_profile: gamma must be positive");
    if (replicas < 2) throw std::invalid_argument("meeting_tail_profile: at least two replicas required");
    for (double t : times)
        if (!(t >= 0.0)) throw std::invalid_argument("meeting_tail_profile: negative grid time");
    const double horizon = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    const double cap = gamma * horizon * (1.0 + 1e-9) + 1e-12;
    const PairLaw law(kernel);
    const double scale = 2.0 * gamma * kernel.pi_diag();

    std::vector<double> meet(replicas);
    std::vector<char> censored(replicas, 0);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        const auto [v, w] = law.sample(rng);
        const MeetingSample m = meeting_time_sample(kernel, v, w, rng, cap);
        meet[r] = m.time;
        censored[r] = m.censored;
    });

    TailProfile out;
    out.times = times;
    out.replicas = replicas;
    out.censored = static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
    std::vector<double> tail(replicas), area(replicas);
    for (double t : times) {
        for (std::size_t r = 0; r < replicas; ++r) {
            const bool alive = censored[r] || meet[r] > gamma * t;
            tail[r] = alive ? scale : 0.0;
            area[r] = scale * (censored[r] ? t : std::min(meet[r] / gamma, t));
        }
        out.tail.push_back(mean_estimate(tail));
        out.integral.push_back(mean_estimate(area));
    }
    return out;
}

BlockHitting block_hitting_times(const Kernel& kernel, const std::vector<std::size_t>& j_list, CounterRng& rng,
                                 double cap)
{
    for (std::size_t j : j_list)
        if (j < 1 || j > kernel.size()) throw std::invalid_argument("block_hitting_times: j outside 1..N");
    std::vector<std::size_t> order(j_list.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return j_list[a] > j_list[b]; });

    BlockHitting out;
    out.j = j_list;
    out.times.assign(j_list.size(), cap);
    out.censored.assign(j_list.size(), true);
    CoalescingSystem system = CoalescingSystem::from_all_sites(kernel);
    for (std::size_t i : order) {
        if (!system.run_until_blocks(j_list[i], rng, cap)) break;
        out.times[i] = system.clock();
        out.censored[i] = false;
    }
    return out;
}

std::vector<BlockHitting> block_hitting_table(const Kernel& kernel, const std::vector<std::size_t>& j_list,
                                              std::size_t replicas, std::uint64_t seed, Parallelism par, double cap)
{
    std::vector<BlockHitting> out(replicas);
    for_each_replica(replicas, par, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        out[r] = block_hitting_times(kernel, j_list, rng, cap);
    });
    return out;
}

std::size_t kingman_levels(double tol)
{
    if (!(tol > 0.0) || !(tol < 2.0)) throw std::invalid_argument("kingman: truncation tolerance must lie in (0, 2)");
    return static_cast<std::size_t>(std::floor(2.0 / tol)) + 1;
}

double kingman_tail_sample(std::size_t j, CounterRng& rng, double tol)
{
    if (j < 1) throw std::invalid_argument("kingman_tail_sample: j must be at least 1");
    const std::size_t levels = kingman_levels(tol);
    double sum = 0.0;
    for (std::size_t i = j + 1; i <= levels; ++i) {
        const double d = static_cast<double>(i);
        sum += rng.exponential(0.5 * d * (d - 1.0));
    }
    return sum;
}

}  // namespace voterlab

#include "voterlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace voterlab {

namespace {

constexpr double kRowSumTolerance = 1e-10;

std::vector<char> reachable(const Matrix& q, bool transpose)
{
    const auto n = static_cast<std::size_t>(q.rows());
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        for (std::size_t y = 0; y < n; ++y) {
            const double w = transpose ? q(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x))
                                       : q(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
            if (w > 0.0 && !seen[y]) {
                seen[y] = 1;
                stack.push_back(y);
            }
        }
    }
    return seen;
}

double stationary_residual(const Matrix& q, const Eigen::RowVectorXd& pi)
{
    return (pi * q - pi).lpNorm<1>();
}

}  // namespace

bool is_irreducible(const Matrix& q)
{
    if (q.rows() == 0) return false;
    const auto forward = reachable(q, false);
    const auto backward = reachable(q, true);
    return std::all_of(forward.begin(), forward.end(), [](char c) { return c != 0; }) &&
           std::all_of(backward.begin(), backward.end(), [](char c) { return c != 0; });
}

std::vector<double> stationary(const Matrix& q)
{
    const Eigen::Index n = q.rows();
    if (n == 0 || q.cols() != n) throw std::invalid_argument("stationary: matrix must be square and nonempty");
    if (!is_irreducible(q)) throw std::invalid_argument("kernel not irreducible");

    Eigen::RowVectorXd pi(n);
    if (n <= 2000) {
        // pi (q - I) = 0 with the last equation replaced by sum(pi) = 1.
        Eigen::MatrixXd a = q.transpose() - Eigen::MatrixXd::Identity(n, n);
        a.row(n - 1).setOnes();
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        b(n - 1) = 1.0;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
        Eigen::VectorXd x = lu.solve(b);
        // One step of iterative refinement.
        x += lu.solve(b - a * x);
        pi = x.transpose();
    } else {
        pi.setConstant(1.0 / static_cast<double>(n));
        for (int it = 0; it < 1000000; ++it) {
            Eigen::RowVectorXd next = 0.5 * (pi + pi * q);
            next /= next.sum();
            const double change = (next - pi).lpNorm<1>();
            pi = next;
            if (change < 1e-15) break;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(pi(i) > 0.0)) throw std::invalid_argument("kernel not irreducible");
    pi /= pi.sum();
    if (stationary_residual(q, pi) > 1e-10) throw std::runtime_error("stationary: solve did not reach residual 1e-10");
    return {pi.data(), pi.data() + n};
}

Kernel::Kernel(Matrix q) : q_(std::move(q))
{
    const Eigen::Index n = q_.rows();
    if (n < 1 || q_.cols() != n) throw std::invalid_argument("kernel: matrix must be square and nonempty");
    for (Eigen::Index x = 0; x < n; ++x) {
        if (q_(x, x) != 0.0) throw std::invalid_argument("kernel: nonzero diagonal entry (zero trace required)");
        double sum = 0.0;
        for (Eigen::Index y = 0; y < n; ++y) {
            const double v = q_(x, y);
            if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("kernel: entries must be finite and nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) throw std::invalid_argument("kernel: rows must sum to 1");
    }
    pi_ = stationary(q_);

    rows_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index x = 0; x < n; ++x) {
        auto& row = rows_[static_cast<std::size_t>(x)];
        std::vector<double> weights;
        for (Eigen::Index y = 0; y < n; ++y) {
            if (q_(x, y) > 0.0) {
                row.support.push_back(static_cast<Site>(y));
                weights.push_back(q_(x, y));
            }
        }
        row.table = AliasTable(weights);
    }
}

double Kernel::pi_diag() const noexcept
{
    double s = 0.0;
    for (double p : pi_) s += p * p;
    return s;
}

double Kernel::pi_max() const noexcept { return *std::max_element(pi_.begin(), pi_.end()); }

bool Kernel::is_reversible(double tol) const noexcept
{
    const auto n = static_cast<Eigen::Index>(size());
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = x + 1; y < n; ++y)
            if (std::abs(pi_[static_cast<std::size_t>(x)] * q_(x, y) - pi_[static_cast<std::size_t>(y)] * q_(y, x)) > tol)
                return false;
    return true;
}

namespace {

Matrix uniformize(const Matrix& q, double t)
{
    const Eigen::Index n = q.rows();
    Matrix result = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    double weight = std::exp(-t);
    double accumulated = 0.0;
    for (int k = 0;; ++k) {
        result += weight * power;
        accumulated += weight;
        if (1.0 - accumulated < 1e-12 && k > t) break;
        if (k > 10000) throw std::runtime_error("semigroup: uniformization did not converge");
        power = power * q;
        weight *= t / static_cast<double>(k + 1);
    }
    return result;
}

void renormalize_rows(Matrix& m)
{
    for (Eigen::Index x = 0; x < m.rows(); ++x) m.row(x) /= m.row(x).sum();
}

}  // namespace

Matrix semigroup(const Kernel& kernel, double t)
{
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup: negative time");
    const Matrix& q = kernel.matrix();
    if (t == 0.0) return Matrix::Identity(q.rows(), q.cols());
    int squarings = 0;
    double piece = t;
    while (piece > 8.0) {
        piece *= 0.5;
        ++squarings;
    }
    Matrix result = uniformize(q, piece);
    renormalize_rows(result);
    for (int i = 0; i < squarings; ++i) {
        result = (result * result).eval();
        renormalize_rows(result);
    }
    return result;
}

double tv_distance_max(const Kernel& kernel, double t)
{
    const Matrix qt = semigroup(kernel, t);
    const auto& pi = kernel.pi();
    double worst = 0.0;
    for (Eigen::Index x = 0; x < qt.rows(); ++x) {
        double tv = 0.0;
        for (Eigen::Index y = 0; y < qt.cols(); ++y) tv += std::abs(qt(x, y) - pi[static_cast<std::size_t>(y)]);
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

double mixing_time(const Kernel& kernel, double tol)
{
    const double threshold = 1.0 / (2.0 * std::numbers::e);
    if (tv_distance_max(kernel, 0.0) <= threshold) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (tv_distance_max(kernel, hi) > threshold) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("mixing_time: no bracket found");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (tv_distance_max(kernel, mid) > threshold)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SpectralGap spectral_gap(const Kernel& kernel)
{
    if (!kernel.is_reversible()) throw std::invalid_argument("spectral gap requires reversibility");
    const auto n = static_cast<Eigen::Index>(kernel.size());
    if (n < 2) throw std::invalid_argument("spectral gap: need at least two sites");
    const auto& pi = kernel.pi();
    Eigen::MatrixXd similar(n, n);
    Eigen::MatrixXd flow(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) {
            const double px = pi[static_cast<std::size_t>(x)];
            const double py = pi[static_cast<std::size_t>(y)];
            similar(x, y) = std::sqrt(px) * kernel(static_cast<Site>(x), static_cast<Site>(y)) / std::sqrt(py);
            flow(x, y) = px * kernel(static_cast<Site>(x), static_cast<Site>(y));
        }
    similar = 0.5 * (similar + similar.transpose()).eval();
    flow = 0.5 * (flow + flow.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> conventional(similar, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> literal(flow, Eigen::EigenvaluesOnly);
    const auto& ev = conventional.eigenvalues();  // ascending
    const auto& lv = literal.eigenvalues();
    return {1.0 - ev(n - 2), lv(n - 1) - lv(n - 2)};
}

PairLaw::PairLaw(const Kernel& kernel)
{
    const auto& pi = kernel.pi();
    for (Site x = 0; x < kernel.size(); ++x) {
        pi_diag_ += pi[x] * pi[x];
        for (Site y : kernel.support(x)) {
            pairs_.emplace_back(x, y);
            probs_.push_back(pi[x] * pi[x] * kernel(x, y));
        }
    }
    for (double p : probs_) normalizer_ += p;
    for (double& p : probs_) p /= normalizer_;
    table_ = AliasTable(probs_);
}

GraphFamily parse_graph_family(const std::string& name)
{
    if (name == "complete") return GraphFamily::complete;
    if (name == "cycle") return GraphFamily::cycle;
    if (name == "torus2d") return GraphFamily::torus2d;
    if (name == "weighted_er") return GraphFamily::weighted_er;
    throw std::invalid_argument("unknown graph family '" + name + "'");
}

std::string to_string(GraphFamily family)
{
    switch (family) {
    case GraphFamily::complete: return "complete";
    case GraphFamily::cycle: return "cycle";
    case GraphFamily::torus2d: return "torus2d";
    case GraphFamily::weighted_er: return "weighted_er";
    }
    return "unknown";
}

namespace {

Kernel random_walk(const Matrix& weights)
{
    Matrix q = weights;
    for (Eigen::Index x = 0; x < q.rows(); ++x) {
        const double s = q.row(x).sum();
        if (!(s > 0.0)) throw std::invalid_argument("graph family: isolated vertex");
        q.row(x) /= s;
    }
    return Kernel(std::move(q));
}

}  // namespace

Kernel build_graph_family(GraphFamily family, std::size_t n, const GraphParams& params)
{
    if (n < 2) throw std::invalid_argument("graph family: need n >= 2");
    const auto size = static_cast<Eigen::Index>(n);
    Matrix w = Matrix::Zero(size, size);
    switch (family) {
    case GraphFamily::complete:
        w.setOnes();
        w.diagonal().setZero();
        return random_walk(w);
    case GraphFamily::cycle:
        for (Eigen::Index x = 0; x < size; ++x) {
            w(x, (x + 1) % size) += 1.0;
            w(x, (x + size - 1) % size) += 1.0;
        }
        return random_walk(w);
    case GraphFamily::torus2d: {
        const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
        if (side * side != size) throw std::invalid_argument("torus2d: n must be a perfect square");
        for (Eigen::Index i = 0; i < side; ++i)
            for (Eigen::Index j = 0; j < side; ++j) {
                const Eigen::Index x = i * side + j;
                w(x, ((i + 1) % side) * side + j) += 1.0;
                w(x, ((i + side - 1) % side) * side + j) += 1.0;
                w(x, i * side + (j + 1) % side) += 1.0;
                w(x, i * side + (j + side - 1) % side) += 1.0;
            }
        w.diagonal().setZero();
        return random_walk(w);
    }
    case GraphFamily::weighted_er: {
        const double p = params.edge_probability;
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("weighted_er: edge probability must be in (0, 1]");
        for (int attempt = 0; attempt < params.retries; ++attempt) {
            CounterRng rng(params.seed, static_cast<std::uint64_t>(attempt));
            w.setZero();
            for (Eigen::Index x = 0; x < size; ++x)
                for (Eigen::Index y = x + 1; y < size; ++y)
                    if (rng.uniform() < p) w(x, y) = w(y, x) = rng.uniform_open_low();
            if (is_irreducible(w)) return random_walk(w);
        }
        throw std::runtime_error("weighted_er: no connected sample within the retry budget");
    }
    }
    throw std::invalid_argument("graph family: unknown family");
}

MixingReport mixing_report(const Kernel& kernel, double gamma)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("mixing_report: gamma must be positive");
    MixingReport report;
    report.t_mix = mixing_time(kernel);
    report.pi_diag = kernel.pi_diag();
    report.pi_max = kernel.pi_max();
    report.gamma = gamma;
    report.mixing_ratio = report.t_mix / gamma;
    if (kernel.is_reversible()) {
        report.gap = spectral_gap(kernel);
        report.gap_ratio = std::log(std::max(std::numbers::e, gamma * report.pi_max)) / (report.gap->conventional * gamma);
    } else {
        report.gap_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

}  // namespace voterlab

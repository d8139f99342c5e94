#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "voterlab/rng.hpp"

namespace voterlab {

using Site = std::uint32_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Stationary law of an irreducible row-stochastic matrix. Dense solve for
/// N <= 2000, power iteration on the lazy chain (I + q) / 2 beyond.
/// Throws std::invalid_argument("kernel not irreducible") otherwise.
std::vector<double> stationary(const Matrix& q);

/// Strong connectivity of the support graph of q.
bool is_irreducible(const Matrix& q);

/// Irreducible, zero-trace voting kernel together with its stationary law
/// and per-row target samplers.
class Kernel {
public:
    explicit Kernel(Matrix q);

    std::size_t size() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    double operator()(Site x, Site y) const noexcept { return q_(x, y); }
    const Matrix& matrix() const noexcept { return q_; }
    const std::vector<double>& pi() const noexcept { return pi_; }

    /// Draws y ~ q(x, .).
    Site sample_target(Site x, CounterRng& rng) const noexcept
    {
        const auto& row = rows_[x];
        return row.support[row.table.sample(rng)];
    }

    /// Sites y with q(x, y) > 0, increasing.
    const std::vector<Site>& support(Site x) const noexcept { return rows_[x].support; }

    double pi_diag() const noexcept;
    double pi_max() const noexcept;

    /// max |pi(x) q(x,y) - pi(y) q(y,x)| <= tol
    bool is_reversible(double tol = 1e-12) const noexcept;

private:
    struct RowSampler {
        std::vector<Site> support;
        AliasTable table;
    };

    Matrix q_;
    std::vector<double> pi_;
    std::vector<RowSampler> rows_;
};

/// q_t = exp(t (q - I)) by uniformization. Poisson weights are summed until
/// the neglected tail is below 1e-12; for t > 8 the time is halved until it
/// is at most 8 and the result squared back up.
Matrix semigroup(const Kernel& kernel, double t);

/// max_x || q_t(x, .) - pi ||_TV
double tv_distance_max(const Kernel& kernel, double t);

/// inf { t >= 0 : d_E(t) <= 1/(2e) } to absolute tolerance tol.
double mixing_time(const Kernel& kernel, double tol = 1e-6);

struct SpectralGap {
    /// 1 - lambda_2 of D^{1/2} q D^{-1/2}; used in every decay estimate.
    double conventional = 0.0;
    /// lambda_1 - lambda_2 of the symmetric matrix pi(x) q(x, y).
    double literal = 0.0;
};

/// Requires reversibility; throws std::invalid_argument
/// ("spectral gap requires reversibility") otherwise.
SpectralGap spectral_gap(const Kernel& kernel);

/// Law of (V, V') with P(V = x, V' = y) = pi(x)^2 q(x, y) / Z.
class PairLaw {
public:
    explicit PairLaw(const Kernel& kernel);

    std::pair<Site, Site> sample(CounterRng& rng) const noexcept
    {
        return pairs_[table_.sample(rng)];
    }

    /// Exact probabilities, aligned with pairs().
    const std::vector<double>& probabilities() const noexcept { return probs_; }
    const std::vector<std::pair<Site, Site>>& pairs() const noexcept { return pairs_; }
    /// Z = sum pi(x)^2 q(x, y)
    double normalizer() const noexcept { return normalizer_; }
    double pi_diag() const noexcept { return pi_diag_; }

private:
    std::vector<std::pair<Site, Site>> pairs_;
    std::vector<double> probs_;
    AliasTable table_;
    double normalizer_ = 0.0;
    double pi_diag_ = 0.0;
};

enum class GraphFamily { complete, cycle, torus2d, weighted_er };

GraphFamily parse_graph_family(const std::string& name);
std::string to_string(GraphFamily family);

struct GraphParams {
    double edge_probability = 0.3;  // weighted_er
    std::uint64_t seed = 0;         // weighted_er
    int retries = 100;              // weighted_er connectivity budget
};

/// Random-walk kernel q(x, y) = w(x, y) / sum_z w(x, z) on the named family.
/// torus2d requires n = L * L; weighted_er draws each edge with the given
/// probability and weight uniform on (0, 1], retrying until connected.
Kernel build_graph_family(GraphFamily family, std::size_t n, const GraphParams& params = {});

struct MixingReport {
    double t_mix = 0.0;
    std::optional<SpectralGap> gap;  // absent for non-reversible kernels
    double pi_diag = 0.0;
    double pi_max = 0.0;
    double gamma = 0.0;
    /// t_mix / gamma; small values mean mixing is fast relative to meeting
    double mixing_ratio = 0.0;
    /// log(e v gamma pi_max) / (gap * gamma); NaN without a gap
    double gap_ratio = 0.0;
};

MixingReport mixing_report(const Kernel& kernel, double gamma);

}  // namespace voterlab

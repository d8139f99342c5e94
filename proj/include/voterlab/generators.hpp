#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "voterlab/kernel.hpp"
#include "voterlab/measures.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

/// phi(lambda) = prod_i <f_i, lambda>, each f_i a function on the types.
class ProductTestFunction {
public:
    static constexpr std::size_t kMaxOrder = 16;

    explicit ProductTestFunction(std::vector<std::vector<double>> factors);

    std::size_t order() const noexcept { return factors_.size(); }
    std::size_t types() const noexcept { return factors_.front().size(); }
    const std::vector<double>& factor(std::size_t i) const noexcept { return factors_[i]; }

    /// phi_A(lambda) over the factors selected by the bitmask A.
    double restricted(std::uint32_t subset, const FiniteMeasure& lambda) const;
    /// Delta_A(sigma, tau) = prod_{i in A} [f_i(sigma) - f_i(tau)].
    double delta(std::uint32_t subset, Type sigma, Type tau) const noexcept;

private:
    std::vector<std::vector<double>> factors_;
};

/// F_f(xi) = <f, m(xi)^{(x)2}> for a function f on pairs of types.
class PairTestFunction {
public:
    explicit PairTestFunction(std::vector<std::vector<double>> values);

    std::size_t types() const noexcept { return types_; }
    double operator()(Type a, Type b) const noexcept { return values_[a * types_ + b]; }

    /// F_f(xi) = sum_{x,y} pi(x) pi(y) f(xi(x), xi(y))
    double evaluate(std::span<const double> pi, const Configuration& xi) const;

private:
    std::size_t types_ = 0;
    std::vector<double> values_;
};

/// phi(lambda)
double phi_eval(const ProductTestFunction& phi, const FiniteMeasure& lambda);

/// A_mu f(tau) = <f, mu> - mu(1) f(tau)
std::vector<double> mutation_operator(const MutationMeasure& mu, std::span<const double> f);

/// Closed form of L_VM (phi o m)(xi): subsets of size >= 2 only.
double voter_generator_phi(const Kernel& kernel, const ProductTestFunction& phi, const Configuration& xi);

/// Closed form of L_mu (phi o m)(xi).
double mutation_generator_phi(const MutationMeasure& mu, std::span<const double> pi, const ProductTestFunction& phi,
                              const Configuration& xi);

/// Closed form of L_VM F_f(xi).
double voter_generator_pair(const Kernel& kernel, const PairTestFunction& f, const Configuration& xi);

/// Closed form of L_mu F_f(xi).
double mutation_generator_pair(const MutationMeasure& mu, std::span<const double> pi, const PairTestFunction& f,
                               const Configuration& xi);

/// Voter generator applied to an arbitrary functional by enumerating every
/// single-site update: sum_{x,y} q(x,y)[F(xi^{x,y}) - F(xi)] + sum_x sum_sigma mu(sigma)[F(xi^{x|sigma}) - F(xi)].
double brute_generator(const Kernel& kernel, const MutationMeasure& mu,
                       const std::function<double(const Configuration&)>& functional, const Configuration& xi);

/// Fleming-Viot generator L_FV^mu phi(lambda).
double fleming_viot_generator(const MutationMeasure& mu, const ProductTestFunction& phi, const FiniteMeasure& lambda);

/// sum_{x,y} pi(x)^2 q(x,y) 1{xi(x) != xi(y)}
double discordance(const Kernel& kernel, const Configuration& xi);

/// Constant C_phi with |L_VM (phi o m)(xi)| <= C_phi * discordance(xi) for
/// every configuration: (3^k - 1 - 2k) prod_i max(1, sup|f_i|).
double phi_bound_constant(const ProductTestFunction& phi);

}  // namespace voterlab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace voterlab {

/// Index of a type in a TypeSpace.
using Type = std::uint32_t;

/// A voter configuration: the type held by each site.
using Configuration = std::vector<Type>;

/// Finite metric space of types. Distances are stored row-major and are
/// validated on construction (symmetry, zero diagonal, positivity off the
/// diagonal, triangle inequality over all triples).
class TypeSpace {
public:
    TypeSpace(std::vector<std::string> labels, std::vector<std::vector<double>> dist);

    /// m points equally spaced in [0, 1] with Euclidean distance.
    static TypeSpace equally_spaced(std::size_t m);
    /// m points with d = 1 between any two distinct points.
    static TypeSpace discrete(std::size_t m);

    std::size_t size() const noexcept { return labels_.size(); }
    double distance(Type a, Type b) const noexcept { return dist_[a * size() + b]; }
    const std::string& label(Type a) const { return labels_.at(a); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    /// Throws std::out_of_range for an unknown label.
    Type index_of(const std::string& label) const;

private:
    std::vector<std::string> labels_;
    std::vector<double> dist_;
};

/// Finitely supported measure: weights[i] is the mass at type i.
struct FiniteMeasure {
    std::vector<double> weights;

    FiniteMeasure() = default;
    explicit FiniteMeasure(std::vector<double> w);
    static FiniteMeasure zero(std::size_t types) { return FiniteMeasure(std::vector<double>(types, 0.0)); }
    static FiniteMeasure point_mass(std::size_t types, Type at);

    std::size_t size() const noexcept { return weights.size(); }
    double total() const noexcept;
    double operator[](Type i) const noexcept { return weights[i]; }
    bool is_probability(double tol = 1e-12) const noexcept;
};

/// Parent-independent mutation measure mu on the type space.
class MutationMeasure {
public:
    MutationMeasure() = default;
    explicit MutationMeasure(std::vector<double> weights);
    static MutationMeasure none(std::size_t types) { return MutationMeasure(std::vector<double>(types, 0.0)); }

    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(Type i) const noexcept { return weights_[i]; }
    /// mu(1)
    double total() const noexcept { return total_; }
    bool is_zero() const noexcept { return total_ == 0.0; }
    MutationMeasure scaled(double c) const;

private:
    std::vector<double> weights_;
    double total_ = 0.0;
};

/// mu / mu(1), with 0/0 = 0.
FiniteMeasure normalize(const MutationMeasure& mu);

/// J(r) = max(0, 1 - r); r must be nonnegative.
double mollifier(double r);

}  // namespace voterlab

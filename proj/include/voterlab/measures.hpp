#pragma once

#include <span>
#include <vector>

#include "voterlab/typespace.hpp"

namespace voterlab {

/// m(xi) = sum_x pi(x) delta_{xi(x)} over a type space with `types` points.
FiniteMeasure empirical(const Configuration& xi, std::span<const double> pi, std::size_t types);

/// Positive atom masses in nonincreasing order, ties by type index.
std::vector<double> atoms_desc(const FiniteMeasure& lambda);

/// Number of atoms.
std::size_t atom_count(const FiniteMeasure& lambda);

/// -sum a_i log a_i (natural log, 0 log 0 = 0).
double entropy(const FiniteMeasure& lambda);

/// sum a_i^2
double diversity(const FiniteMeasure& lambda);

/// lambda*: weight lambda({sigma})^2 at sigma.
FiniteMeasure star(const FiniteMeasure& lambda);

/// iint J(d(s, t) / eps) dlambda(s) dlambda(t) for eps > 0.
double mollified_self_mass(const FiniteMeasure& lambda, const TypeSpace& space, double eps);

/// sup over 0 < eps <= 1 of |iint J(d/eps) dlambda^2 - iint J(d/eps) dnu^2|.
/// The integrand is piecewise linear in 1/eps, so the supremum is taken
/// exactly over eps = 1, every pairwise distance in (0, 1), and eps -> 0+.
double atomic_discrepancy(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space);

/// Exact Prohorov distance between finitely supported measures. For each
/// critical radius (0 and every distance between the supports) the largest
/// violation max_B [lambda(B) - nu(B^eps)] is obtained from a bipartite
/// max-flow; the distance is min over radii c of max(c, violation(c)).
double prohorov(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space);

/// Same distance with violations found by enumerating every subset of the
/// supports. Throws std::length_error when a support exceeds 24 atoms.
double prohorov_by_subsets(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space);

/// rho_a = prohorov + atomic_discrepancy
double rho_a(const FiniteMeasure& lambda, const FiniteMeasure& nu, const TypeSpace& space);

}  // namespace voterlab
